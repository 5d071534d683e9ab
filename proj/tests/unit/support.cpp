#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace testing_support {

std::filesystem::path fixture(const std::string& relative) {
  return std::filesystem::path(EVENTREC_FIXTURE_DIR) / relative;
}

eventrec::MusicEventGraph two_path_graph() { return eventrec::load_graph(fixture("two_path/graph.json").string()); }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("eventrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

eventrec::SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<eventrec::Triplet> entries;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (unit(rng) < density) entries.push_back({i, j, unit(rng) * 2.0 - 1.0});
    }
  }
  // Keep the matrix nonzero even at tiny densities.
  if (entries.empty()) entries.push_back({0, 0, 1.0});
  return eventrec::SparseMatrix(rows, cols, entries);
}

eventrec::SparseMatrix exact_rank(std::size_t rows, std::size_t cols, std::size_t rank, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(rows, rank), b(rank, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = normal(rng);
  const Eigen::MatrixXd dense = a * b;
  std::vector<eventrec::Triplet> entries;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) entries.push_back({i, j, v});
    }
  }
  return eventrec::SparseMatrix(rows, cols, entries);
}

double pair_count_auc(std::span<const bool> relevant) {
  std::size_t good = 0, total = 0;
  for (std::size_t i = 0; i < relevant.size(); ++i) {
    for (std::size_t j = 0; j < relevant.size(); ++j) {
      if (!relevant[i] || relevant[j]) continue;
      ++total;
      if (i < j) ++good;
    }
  }
  return static_cast<double>(good) / static_cast<double>(total);
}

namespace {

double plain_cosine(const eventrec::LatentVector& a, const eventrec::LatentVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (std::sqrt(na) <= eventrec::kZeroNorm || std::sqrt(nb) <= eventrec::kZeroNorm) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> cosine_order(const eventrec::LatentVector& pref, std::span<const eventrec::Candidate> cands) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& c : cands) scored.emplace_back(plain_cosine(pref, c.vector), c.id);
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::string> ids;
  for (const auto& s : scored) ids.push_back(s.second);
  return ids;
}

}  // namespace

std::vector<OracleItem> oracle_average_cosine(std::span<const eventrec::LatentVector> prefs,
                                              std::span<const eventrec::Candidate> candidates) {
  std::vector<OracleItem> out;
  for (const auto& c : candidates) {
    double sum = 0;
    for (const auto& p : prefs) sum += plain_cosine(p, c.vector);
    out.push_back({c.id, sum / static_cast<double>(prefs.size())});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.id < y.id;
  });
  return out;
}

std::vector<OracleItem> oracle_average_rank(std::span<const eventrec::LatentVector> prefs,
                                            std::span<const eventrec::Candidate> candidates) {
  std::map<std::string, double> total;
  for (const auto& p : prefs) {
    const auto order = cosine_order(p, candidates);
    for (std::size_t r = 0; r < order.size(); ++r) total[order[r]] += static_cast<double>(r + 1);
  }
  std::vector<OracleItem> out;
  for (const auto& [id, sum] : total) out.push_back({id, sum / static_cast<double>(prefs.size())});
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (x.score != y.score) return x.score < y.score;
    return x.id < y.id;
  });
  return out;
}

std::vector<std::string> oracle_interleave(std::span<const eventrec::LatentVector> prefs,
                                           std::span<const eventrec::Candidate> candidates) {
  std::vector<std::vector<std::string>> lists;
  for (const auto& p : prefs) lists.push_back(cosine_order(p, candidates));
  std::vector<std::string> out;
  for (std::size_t turn = 0; out.size() < candidates.size(); ++turn) {
    for (const auto& id : lists[turn % lists.size()]) {
      if (std::find(out.begin(), out.end(), id) == out.end()) {
        out.push_back(id);
        break;
      }
    }
  }
  return out;
}

eventrec::GeneratorConfig small_world_config(std::uint64_t seed) {
  eventrec::GeneratorConfig config;
  config.n_artists = 400;
  config.n_event_artists = 50;
  config.n_events = 30;
  config.n_tags = 200;
  config.n_genres = 8;
  config.min_tag_support = 5;
  config.median_footprint = 30;
  config.max_footprint = 200;
  config.seed = seed;
  return config;
}

}  // namespace testing_support
