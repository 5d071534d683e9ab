#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>

#include "eventrec/artist_space.hpp"
#include "eventrec/error.hpp"
#include "support.hpp"

using namespace eventrec;

namespace {

std::vector<Artist> artists(std::size_t n) {
  std::vector<Artist> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "a%02zu", i);
    out.push_back({id, id, 100 * (i + 1), "", false});
  }
  return out;
}

// Two genre blocks of `half` artists each: 0.8 within a block, nothing across.
RawDataMatrix two_blocks(std::size_t half) {
  const auto as = artists(2 * half);
  std::vector<AffinityRecord> aff;
  for (std::size_t i = 0; i < 2 * half; ++i)
    for (std::size_t j = 0; j < 2 * half; ++j)
      if (i != j && (i < half) == (j < half)) aff.push_back({as[i].id, as[j].id, 0.8});
  return build_raw_matrix(as, {}, aff);
}

bool same_block(std::size_t i, std::size_t j, std::size_t half) { return (i < half) == (j < half); }

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected eventrec::Error");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("raw matrix shape, diagonal and zero handling") {
  SUBCASE("two artists without links are the identity") {
    const auto raw = build_raw_matrix(artists(2), {}, {});
    CHECK(raw.matrix.rows() == 2);
    CHECK(raw.matrix.cols() == 2);
    CHECK(raw.matrix.to_dense() == Eigen::MatrixXd::Identity(2, 2));
  }
  SUBCASE("three artists and one tag affinity give four nonzeros") {
    const std::vector<Tag> tags{{"t1", "rock", 1, true}};
    const std::vector<AffinityRecord> aff{{"a00", "t1", 0.5}};
    const auto raw = build_raw_matrix(artists(3), tags, aff);
    CHECK(raw.matrix.cols() == 4);
    CHECK(raw.matrix.nnz() == 4);
    CHECK(raw.matrix.coeff(0, 3) == 0.5);
    for (std::size_t i = 0; i < 3; ++i) CHECK(raw.matrix.coeff(i, i) == 1.0);
  }
  SUBCASE("explicit zero weights are absent and repeated pairs keep the maximum") {
    const std::vector<AffinityRecord> aff{{"a00", "a01", 0.0}, {"a01", "a00", 0.3}, {"a01", "a00", 0.6}};
    const auto raw = build_raw_matrix(artists(2), {}, aff);
    CHECK(raw.matrix.coeff(0, 1) == 0.0);
    CHECK(raw.matrix.coeff(1, 0) == 0.6);
    CHECK(raw.matrix.nnz() == 3);
  }
}

TEST_CASE("raw matrix rejects bad references and weights") {
  CHECK(kind_of([] { build_raw_matrix(artists(2), {}, std::vector<AffinityRecord>{{"zz", "a00", 0.5}}); }) ==
        ErrorKind::UnknownEntity);
  CHECK(kind_of([] { build_raw_matrix(artists(2), {}, std::vector<AffinityRecord>{{"a00", "nope", 0.5}}); }) ==
        ErrorKind::UnknownEntity);
  CHECK(kind_of([] { build_raw_matrix(artists(2), {}, std::vector<AffinityRecord>{{"a00", "a01", 1.2}}); }) ==
        ErrorKind::InvalidWeight);
  CHECK(kind_of([] { build_raw_matrix(artists(2), {}, std::vector<AffinityRecord>{{"a00", "a01", -0.1}}); }) ==
        ErrorKind::InvalidWeight);
}

TEST_CASE("fit embeds every feature once") {
  const std::vector<Tag> tags{{"t1", "rock", 2, true}, {"t2", "jazz", 1, true}};
  const std::vector<AffinityRecord> aff{{"a00", "t1", 1.0}, {"a01", "t1", 0.5}, {"a02", "t2", 0.7}};
  const auto raw = build_raw_matrix(artists(4), tags, aff);
  const auto index = fit(raw, 3, 0);
  CHECK(index.embeddings().cols() == 6);
  CHECK(index.embeddings().rows() == 3);
  CHECK(index.space().artist_count() == 4);
  CHECK(index.space().tag_count() == 2);
  CHECK(kind_of([&] { fit(raw, 0, 0); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([&] { fit(raw, EmbeddingIndex::kMaxRank + 1, 0); }) == ErrorKind::InvalidRank);
}

TEST_CASE("identity over five artists gives orthogonal embeddings") {
  const auto index = fit(build_raw_matrix(artists(5), {}, {}), 5, 0);
  for (const auto& a : index.space().artists())
    for (const auto& b : index.space().artists())
      if (a != b) CHECK(std::abs(index.similarity(a, b)) <= 1e-8);
}

TEST_CASE("identical columns embed identically") {
  // a02 and a03 carry exactly the same links to every other feature.
  const std::vector<Tag> tags{{"t1", "rock", 3, true}};
  const std::vector<AffinityRecord> aff{{"a00", "a02", 0.5}, {"a00", "a03", 0.5}, {"a01", "a02", 0.9},
                                        {"a01", "a03", 0.9}, {"a02", "a03", 1.0}, {"a03", "a02", 1.0},
                                        {"a00", "t1", 0.4}, {"a01", "t1", 0.8}};
  const auto index = fit(build_raw_matrix(artists(4), tags, aff), 3, 0);
  CHECK(index.similarity("a02", "a03") == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("planted two-block structure is recovered") {
  const std::size_t half = 10;
  const auto raw = two_blocks(half);
  for (std::size_t k : {2u, 4u, 8u}) {
    const auto index = fit(raw, k, 1);
    const auto ids = index.space().artists();
    double within = 0, across = 0;
    std::size_t nw = 0, na = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        if (i == j) continue;
        const double c = index.similarity(ids[i], ids[j]);
        (same_block(i, j, half) ? within : across) += c;
        ++(same_block(i, j, half) ? nw : na);
      }
    }
    CHECK(within / nw > across / na);
    if (k == 2) {
      // Every within-block pair beats every across-block pair.
      double min_within = 1, max_across = -1;
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < ids.size(); ++j) {
          if (i == j) continue;
          const double c = index.similarity(ids[i], ids[j]);
          if (same_block(i, j, half)) min_within = std::min(min_within, c);
          else max_across = std::max(max_across, c);
        }
      CHECK(min_within > max_across);
      // And a query sees its own block first.
      const auto hits = index.similar(ids[0], 2 * half - 1);
      for (std::size_t r = 0; r + 1 < half; ++r) CHECK(hits[r].id < "a10");
      for (std::size_t r = half - 1; r < hits.size(); ++r) CHECK(hits[r].id >= "a10");
    }
  }
}

TEST_CASE("embed_new_artist lives in the column space") {
  // Symmetric rank-3 affinities X = B B^T with unit rows in B, so the
  // diagonal is already 1 and every entry lies in [0, 1]. Rows lean on one
  // axis each, four per axis, which keeps the three singular values close:
  // x V Sigma and the column embedding Sigma v differ by one factor of Sigma.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = 12;
  Eigen::MatrixXd b(n, 3);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < 3; ++j) b(i, j) = j == i % 3 ? 1.0 : 0.02 * unit(rng);
  b.rowwise().normalize();
  const Eigen::MatrixXd s = b * b.transpose();
  const auto as = artists(n);
  std::vector<AffinityRecord> aff;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) aff.push_back({as[i].id, as[j].id, s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  const auto raw = build_raw_matrix(as, {}, aff);
  const auto index = fit(raw, 3, 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto v = index.embed_new_artist(raw.matrix.row(i));
    CHECK(cosine(v, index.embedding(as[i].id)) >= 0.99);
    // Exact for any spectrum: x_i V Sigma = Sigma (Sigma v_i).
    const LatentVector expected = index.svd().sigma.cwiseProduct(index.embedding(as[i].id));
    CHECK((v - expected).norm() <= 1e-8 * expected.norm());
  }

  const auto zero = index.embed_new_artist(SparseVector(n));
  CHECK(zero.norm() == 0.0);
  for (const auto& f : index.space().features()) CHECK(cosine(zero, index.embedding(f)) == 0.0);

  const auto x = raw.matrix.row(3);
  const auto one = index.embed_new_artist(x);
  const auto two = index.embed_new_artist(x.scaled(2.0));
  for (const auto& f : index.space().features())
    CHECK(cosine(one, index.embedding(f)) == doctest::Approx(cosine(two, index.embedding(f))).epsilon(1e-12));
}

TEST_CASE("similar honours n, filters, self exclusion and id tie-break") {
  const std::vector<Tag> tags{{"t1", "rock", 2, true}};
  const std::vector<AffinityRecord> aff{{"a00", "t1", 1.0}, {"a01", "t1", 1.0}};
  const auto raw = build_raw_matrix(artists(3), tags, aff);
  const auto index = fit(raw, 3, 0);

  CHECK(index.similar("a00", 0).empty());
  CHECK(kind_of([&] { index.similar("missing", 3); }) == ErrorKind::UnknownEntity);

  const auto only_artists = index.similar("t1", 10, FeatureFilter::artists);
  CHECK(only_artists.size() == 3);
  for (const auto& hit : only_artists) CHECK(index.space().kind(index.space().require(hit.id)) == FeatureKind::artist);

  const auto all = index.similar("a00", 10);
  CHECK(all.size() == 3);
  for (const auto& hit : all) CHECK(hit.id != "a00");
  for (std::size_t r = 1; r < all.size(); ++r) {
    CHECK(all[r - 1].score >= all[r].score);
    if (all[r - 1].score == all[r].score) CHECK(all[r - 1].id < all[r].id);
  }

  // a00 and a01 have identical profiles, so their raw cosines to t1 tie.
  const auto raw_hits = similar_raw(raw, "t1", 2, FeatureFilter::artists);
  REQUIRE(raw_hits.size() == 2);
  CHECK(raw_hits[0].score == raw_hits[1].score);
  CHECK(raw_hits[0].id == "a00");
  CHECK(raw_hits[1].id == "a01");
}

TEST_CASE("length normalized dot product equals cosine in the latent space") {
  const auto index = fit(two_blocks(6), 4, 0);
  const auto& e = index.embeddings();
  for (Eigen::Index i = 0; i < e.cols(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j)
      CHECK(e.col(i).normalized().dot(e.col(j).normalized()) == doctest::Approx(cosine(e.col(i), e.col(j))));
}

TEST_CASE("raw cosine ranking ignores positive rescaling of a single column") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.05, 0.5);
  const auto as = artists(8);
  const std::vector<Tag> tags{{"t1", "rock", 0, true}, {"t2", "jazz", 0, true}};
  std::vector<AffinityRecord> aff;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j)
      if (i != j && unit(rng) < 0.3) aff.push_back({as[i].id, as[j].id, unit(rng)});
    aff.push_back({as[i].id, i % 2 ? "t1" : "t2", unit(rng)});
    if (i % 3 == 0) aff.push_back({as[i].id, "t1", unit(rng)});
  }
  auto scaled = aff;
  for (auto& r : scaled)
    if (r.feature_id == "t1") r.weight *= 2.0;
  for (const char* query : {"a02", "a03", "t1"}) {
    const auto base = similar_raw(build_raw_matrix(as, tags, aff), query, 9);
    const auto after = similar_raw(build_raw_matrix(as, tags, scaled), query, 9);
    REQUIRE(base.size() == after.size());
    for (std::size_t r = 0; r < base.size(); ++r) CHECK(base[r].id == after[r].id);
  }
}

TEST_CASE("fit is bit-identical for a fixed seed") {
  const auto raw = two_blocks(8);
  const auto a = fit(raw, 5, 77);
  const auto b = fit(raw, 5, 77);
  CHECK(a.embeddings() == b.embeddings());
}
