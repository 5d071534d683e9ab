#include "eventrec/artist_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

void check_weight(double weight, const std::string& context) {
  if (!std::isfinite(weight) || weight < 0.0 || weight > 1.0) {
    throw Error(ErrorKind::InvalidWeight, context + " weight " + std::to_string(weight) + " outside [0, 1]");
  }
}

bool ranks_before(const ScoredFeature& a, const ScoredFeature& b) {
  return a.score != b.score ? a.score > b.score : a.id < b.id;
}

std::vector<ScoredFeature> top_n(std::vector<ScoredFeature> scored, std::size_t n) {
  const std::size_t keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    ranks_before);
  scored.resize(keep);
  return scored;
}

}  // namespace

FeatureSpace::FeatureSpace(std::vector<ArtistId> artists, std::vector<TagId> tags)
    : artist_count_(artists.size()) {
  features_ = std::move(artists);
  features_.insert(features_.end(), std::make_move_iterator(tags.begin()), std::make_move_iterator(tags.end()));
  column_of_.reserve(features_.size());
  for (std::size_t j = 0; j < features_.size(); ++j) {
    if (!column_of_.emplace(features_[j], j).second) {
      throw Error(ErrorKind::MalformedInput, "feature id '" + features_[j] + "' is not unique");
    }
  }
}

std::optional<std::size_t> FeatureSpace::column(const FeatureId& id) const {
  const auto it = column_of_.find(id);
  if (it == column_of_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSpace::require(const FeatureId& id) const {
  const auto it = column_of_.find(id);
  if (it == column_of_.end()) throw Error(ErrorKind::UnknownEntity, "unknown feature '" + id + "'");
  return it->second;
}

bool FeatureSpace::accepts(std::size_t column, FeatureFilter filter) const noexcept {
  switch (filter) {
    case FeatureFilter::any: return true;
    case FeatureFilter::artists: return column < artist_count_;
    case FeatureFilter::tags: return column >= artist_count_;
  }
  return true;
}

SparseVector FeatureSpace::vector(std::span<const std::pair<FeatureId, double>> entries) const {
  std::map<std::size_t, double> cells;
  for (const auto& [id, weight] : entries) {
    check_weight(weight, "feature '" + id + "'");
    auto& cell = cells[require(id)];
    cell = std::max(cell, weight);
  }
  std::vector<std::pair<std::size_t, double>> out(cells.begin(), cells.end());
  return SparseVector(size(), std::move(out));
}

RawDataMatrix build_raw_matrix(std::span<const Artist> artists, std::span<const Tag> tags,
                               std::span<const AffinityRecord> affinities) {
  std::vector<ArtistId> artist_ids;
  artist_ids.reserve(artists.size());
  for (const auto& a : artists) artist_ids.push_back(a.id);
  std::vector<TagId> tag_ids;
  tag_ids.reserve(tags.size());
  for (const auto& t : tags) tag_ids.push_back(t.id);
  FeatureSpace space(std::move(artist_ids), std::move(tag_ids));

  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t i = 0; i < space.artist_count(); ++i) cells[{i, i}] = 1.0;
  for (const auto& record : affinities) {
    check_weight(record.weight, "affinity (" + record.artist_id + ", " + record.feature_id + ")");
    const auto row = space.column(record.artist_id);
    if (!row || *row >= space.artist_count()) {
      throw Error(ErrorKind::UnknownEntity, "unknown artist '" + record.artist_id + "'");
    }
    const std::size_t col = space.require(record.feature_id);
    if (record.weight == 0.0) continue;
    auto& cell = cells[{*row, col}];
    cell = std::max(cell, record.weight);
  }

  std::vector<Triplet> triplets;
  triplets.reserve(cells.size());
  for (const auto& [coord, weight] : cells) triplets.push_back({coord.first, coord.second, weight});
  SparseMatrix matrix(space.artist_count(), space.size(), triplets);
  return RawDataMatrix{std::move(matrix), std::move(space)};
}

EmbeddingIndex::EmbeddingIndex(TruncatedSvd svd, FeatureSpace space)
    : svd_(std::move(svd)), space_(std::move(space)) {
  if (svd_.cols() != space_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "factorization has " + std::to_string(svd_.cols()) +
                                                  " columns for " + std::to_string(space_.size()) + " features");
  }
  embeddings_ = feature_embeddings(svd_);
  unit_embeddings_ = embeddings_;
  for (Eigen::Index j = 0; j < unit_embeddings_.cols(); ++j) {
    const double norm = unit_embeddings_.col(j).norm();
    if (norm > kZeroNorm) {
      unit_embeddings_.col(j) /= norm;
    } else {
      unit_embeddings_.col(j).setZero();
    }
  }
}

LatentVector EmbeddingIndex::embedding(const FeatureId& id) const {
  return embeddings_.col(static_cast<Eigen::Index>(space_.require(id)));
}

double EmbeddingIndex::similarity(const FeatureId& a, const FeatureId& b) const {
  return cosine(embedding(a), embedding(b));
}

LatentVector EmbeddingIndex::embed_new_artist(const SparseVector& affinities) const {
  const LatentVector folded = fold_in(affinities, svd_);
  return folded.cwiseProduct(svd_.sigma).cwiseProduct(svd_.sigma);
}

std::vector<ScoredFeature> EmbeddingIndex::similar(const FeatureId& id, std::size_t n,
                                                   FeatureFilter filter) const {
  const std::size_t column = space_.require(id);
  return nearest(embeddings_.col(static_cast<Eigen::Index>(column)), n, filter, column);
}

std::vector<ScoredFeature> EmbeddingIndex::nearest(const LatentVector& query, std::size_t n,
                                                   FeatureFilter filter,
                                                   std::optional<std::size_t> exclude) const {
  if (n == 0) return {};
  if (query.size() != embeddings_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "query dimension does not match the index rank");
  }
  const double norm = query.norm();
  const Eigen::VectorXd scores =
      norm > kZeroNorm ? Eigen::VectorXd(unit_embeddings_.transpose() * (query / norm))
                       : Eigen::VectorXd::Zero(unit_embeddings_.cols());
  std::vector<ScoredFeature> scored;
  scored.reserve(space_.size());
  for (std::size_t j = 0; j < space_.size(); ++j) {
    if (exclude && *exclude == j) continue;
    if (!space_.accepts(j, filter)) continue;
    scored.push_back({space_.features()[j], std::clamp(scores(static_cast<Eigen::Index>(j)), -1.0, 1.0)});
  }
  return top_n(std::move(scored), n);
}

EmbeddingIndex fit(const RawDataMatrix& raw, std::size_t k, std::uint64_t seed, const SvdOptions& options) {
  if (k < 1 || k > EmbeddingIndex::kMaxRank) {
    throw Error(ErrorKind::InvalidRank, "rank " + std::to_string(k) + " outside [1, " +
                                            std::to_string(EmbeddingIndex::kMaxRank) + "]");
  }
  return EmbeddingIndex(truncated_svd(raw.matrix, k, seed, options), raw.space);
}

std::vector<ScoredFeature> similar_raw(const RawDataMatrix& raw, const FeatureId& id, std::size_t n,
                                       FeatureFilter filter) {
  const std::size_t query = raw.space.require(id);
  if (n == 0) return {};
  // Column-wise dot products and norms from one pass over the rows.
  const auto& storage = raw.matrix.storage();
  Eigen::VectorXd dots = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(raw.space.size()));
  Eigen::VectorXd norms = Eigen::VectorXd::Zero(dots.size());
  for (Eigen::Index r = 0; r < storage.outerSize(); ++r) {
    const double anchor = storage.coeff(r, static_cast<Eigen::Index>(query));
    for (SparseMatrix::Storage::InnerIterator it(storage, r); it; ++it) {
      norms(it.col()) += it.value() * it.value();
      dots(it.col()) += anchor * it.value();
    }
  }
  const double query_norm = std::sqrt(norms(static_cast<Eigen::Index>(query)));
  std::vector<ScoredFeature> scored;
  for (std::size_t j = 0; j < raw.space.size(); ++j) {
    if (j == query || !raw.space.accepts(j, filter)) continue;
    const double norm = std::sqrt(norms(static_cast<Eigen::Index>(j)));
    const double score = (norm <= kZeroNorm || query_norm <= kZeroNorm)
                             ? 0.0
                             : std::clamp(dots(static_cast<Eigen::Index>(j)) / (norm * query_norm), -1.0, 1.0);
    scored.push_back({raw.space.features()[j], score});
  }
  return top_n(std::move(scored), n);
}

}  // namespace eventrec
