#include "eventrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <numeric>
#include <random>
#include <thread>
#include <unordered_map>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix(a ^ splitmix(b ^ splitmix(c)));
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Each index writes
// only its own output slot, so results do not depend on scheduling.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) body(i);
    });
  }
  for (auto& worker : pool) worker.join();
}

// AUC of test artist i against every other test artist under a cosine matrix;
// ties fall back to the artists' position (ids are sorted, so this is id order).
std::optional<double> artist_auc(const Eigen::MatrixXd& cosines, std::size_t i,
                                 const std::vector<std::vector<bool>>& truth) {
  const auto n = static_cast<std::size_t>(cosines.rows());
  std::vector<std::size_t> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) others.push_back(j);
  }
  const auto row = static_cast<Eigen::Index>(i);
  std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
    return cosines(row, static_cast<Eigen::Index>(a)) > cosines(row, static_cast<Eigen::Index>(b));
  });
  const std::unique_ptr<bool[]> labels(new bool[others.size()]);
  std::size_t relevant = 0;
  for (std::size_t p = 0; p < others.size(); ++p) {
    labels[p] = truth[i][others[p]];
    relevant += labels[p] ? 1 : 0;
  }
  if (relevant == 0 || relevant == others.size()) return std::nullopt;
  return auc(std::span<const bool>(labels.get(), others.size()));
}

Eigen::MatrixXd unit_rows(Eigen::MatrixXd m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double norm = m.row(r).norm();
    if (norm > kZeroNorm) {
      m.row(r) /= norm;
    } else {
      m.row(r).setZero();
    }
  }
  return m;
}

FootprintRow summarize(std::string method, std::size_t rank, std::size_t footprint,
                       const std::vector<std::optional<double>>& per_artist) {
  FootprintRow row{std::move(method), rank, footprint, 0.0, 0};
  double total = 0.0;
  for (const auto& value : per_artist) {
    if (!value) continue;
    total += *value;
    ++row.evaluated;
  }
  row.mean_auc = row.evaluated > 0 ? total / static_cast<double>(row.evaluated) : 0.0;
  return row;
}

std::vector<std::size_t> top_by_cosine(const LatentVector& center, std::span<const LatentVector* const> vectors,
                                       std::span<const std::string* const> ids) {
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) score[i] = cosine(center, *vectors[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return *ids[a] < *ids[b];
  });
  return order;
}

FusionCell summarize_cell(std::string label, PreferenceSource source, const std::vector<double>& values) {
  FusionCell cell{std::move(label), source, 0.0, 0.0, values.size()};
  if (values.empty()) return cell;
  cell.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - cell.mean) * (v - cell.mean);
  cell.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return cell;
}

}  // namespace

double auc(std::span<const bool> labels) {
  std::uint64_t relevant_seen = 0;
  std::uint64_t correct = 0;
  std::uint64_t relevant = 0;
  for (const bool label : labels) relevant += label ? 1 : 0;
  const std::uint64_t negatives = labels.size() - relevant;
  if (relevant == 0 || negatives == 0) {
    throw Error(ErrorKind::UndefinedMetric, "AUC needs at least one relevant and one non-relevant item");
  }
  // Each non-relevant item is preceded by relevant_seen correctly ordered pairs.
  for (const bool label : labels) {
    if (label) {
      ++relevant_seen;
    } else {
      correct += relevant_seen;
    }
  }
  return static_cast<double>(correct) / (static_cast<double>(relevant) * static_cast<double>(negatives));
}

double auc(std::span<const std::string> ranking, const std::unordered_set<std::string>& relevant) {
  std::unordered_set<std::string> seen;
  const std::unique_ptr<bool[]> labels(new bool[ranking.size()]);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    labels[i] = relevant.contains(ranking[i]);
    if (labels[i]) seen.insert(ranking[i]);
  }
  if (seen.size() != relevant.size()) {
    for (const auto& id : relevant) {
      if (!seen.contains(id)) throw Error(ErrorKind::UnknownEntity, "relevant id '" + id + "' is not ranked");
    }
  }
  return auc(std::span<const bool>(labels.get(), ranking.size()));
}

const FootprintRow* FootprintExperimentResult::find(std::string_view method, std::size_t rank,
                                                    std::size_t footprint) const {
  for (const auto& row : rows) {
    if (row.method == method && row.rank == rank && row.footprint == footprint) return &row;
  }
  return nullptr;
}

SparseVector reduce_footprint(const SparseVector& x, std::size_t budget, std::uint64_t seed) {
  if (budget >= x.nnz()) return x;
  std::vector<std::size_t> positions(x.nnz());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<std::size_t> chosen;
  std::mt19937_64 rng(seed);
  std::sample(positions.begin(), positions.end(), std::back_inserter(chosen), budget, rng);
  std::vector<std::pair<std::size_t, double>> entries;
  entries.reserve(chosen.size());
  for (const auto p : chosen) entries.emplace_back(x.indices()[p], x.values()[p]);
  return SparseVector(x.size(), std::move(entries));
}

FootprintExperimentResult footprint_experiment(const RawDataMatrix& raw, const FootprintExperimentConfig& config) {
  const std::size_t n = raw.space.artist_count();
  if (config.train_size + config.test_size != n) {
    throw Error(ErrorKind::InvalidConfig, "train_size + test_size must equal the artist count (" +
                                              std::to_string(n) + ")");
  }
  if (config.test_size < 2 || config.train_size == 0) throw Error(ErrorKind::InvalidConfig, "split too small");
  for (const auto f : config.footprint_sizes) {
    if (f == 0) throw Error(ErrorKind::InvalidConfig, "footprint sizes must be positive");
  }

  FootprintExperimentResult result;
  result.config = config;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.test_size));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(config.test_size), order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  for (const auto t : test) result.test_artists.push_back(raw.space.features()[t]);

  std::vector<std::size_t> columns(train);
  for (std::size_t t = n; t < raw.space.size(); ++t) columns.push_back(t);
  const SparseMatrix train_matrix = raw.matrix.submatrix(train, columns);
  const SparseMatrix test_matrix = raw.matrix.submatrix(test, columns);

  const std::size_t m = test.size();
  std::vector<std::vector<bool>> truth(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      truth[i][j] = i != j && raw.matrix.coeff(test[i], test[j]) != 0.0;
      any = any || truth[i][j];
    }
    if (!any) ++result.skipped;
  }

  std::vector<SparseVector> originals(m);
  for (std::size_t i = 0; i < m; ++i) originals[i] = test_matrix.row(i);
  std::vector<std::vector<SparseVector>> reduced(config.footprint_sizes.size(), std::vector<SparseVector>(m));
  for (std::size_t f = 0; f < config.footprint_sizes.size(); ++f) {
    const std::size_t budget = config.footprint_sizes[f];
    for (std::size_t i = 0; i < m; ++i) {
      reduced[f][i] = reduce_footprint(originals[i], budget, mix(config.seed, budget, test[i]));
    }
  }

  const auto evaluate = [&](const Eigen::MatrixXd& vectors) {
    const Eigen::MatrixXd units = unit_rows(vectors);
    const Eigen::MatrixXd cosines = units * units.transpose();
    std::vector<std::optional<double>> per_artist(m);
    parallel_for(m, config.threads, [&](std::size_t i) { per_artist[i] = artist_auc(cosines, i, truth); });
    return per_artist;
  };

  for (const auto k : config.ranks) {
    const TruncatedSvd svd = truncated_svd(train_matrix, k, config.seed, config.svd);
    const Eigen::MatrixXd scaled_v = svd.v * svd.sigma.asDiagonal();
    for (std::size_t f = 0; f < config.footprint_sizes.size(); ++f) {
      Eigen::MatrixXd embedded = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
      for (std::size_t i = 0; i < m; ++i) {
        const auto& x = reduced[f][i];
        for (std::size_t p = 0; p < x.nnz(); ++p) {
          embedded.row(static_cast<Eigen::Index>(i)) += x.values()[p] * scaled_v.row(static_cast<Eigen::Index>(x.indices()[p]));
        }
      }
      result.rows.push_back(summarize("lsa", k, config.footprint_sizes[f], evaluate(embedded)));
    }
  }
  if (config.include_raw_baseline) {
    for (std::size_t f = 0; f < config.footprint_sizes.size(); ++f) {
      Eigen::MatrixXd dense(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(columns.size()));
      for (std::size_t i = 0; i < m; ++i) dense.row(static_cast<Eigen::Index>(i)) = reduced[f][i].to_dense().transpose();
      result.rows.push_back(summarize("raw", 0, config.footprint_sizes[f], evaluate(dense)));
    }
  }
  return result;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "pearson inputs differ in length");
  if (x.empty()) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
}

LongTailReport long_tail_stats(const CorpusBundle& corpus) {
  LongTailReport report;
  const auto& artists = corpus.artists;
  const std::size_t n = artists.size();
  report.artist_count = n;
  if (n == 0) return report;

  std::vector<std::size_t> by_popularity(n);
  std::iota(by_popularity.begin(), by_popularity.end(), 0);
  std::sort(by_popularity.begin(), by_popularity.end(), [&](std::size_t a, std::size_t b) {
    if (artists[a].listener_count != artists[b].listener_count) {
      return artists[a].listener_count > artists[b].listener_count;
    }
    return artists[a].id < artists[b].id;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[by_popularity[r]] = r;

  std::uint64_t total = 0;
  for (const auto& a : artists) total += a.listener_count;
  std::uint64_t cumulative = 0;
  report.top_coverage_count = n;
  for (std::size_t r = 0; r < n; ++r) {
    cumulative += artists[by_popularity[r]].listener_count;
    if (5 * cumulative >= 4 * total) {
      report.top_coverage_count = r + 1;
      break;
    }
  }
  report.top_coverage_fraction = static_cast<double>(report.top_coverage_count) / static_cast<double>(n);

  const RawDataMatrix raw = build_raw_matrix(corpus.artists, corpus.tags, corpus.affinities);
  std::vector<double> footprint(n);
  std::vector<double> ranks(n);
  std::vector<std::size_t> all_sizes;
  std::vector<std::size_t> event_sizes;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = raw.matrix.row_nnz(i);
    footprint[i] = static_cast<double>(size);
    ranks[i] = static_cast<double>(rank[i]);
    all_sizes.push_back(size);
    if (artists[i].is_event_artist) {
      event_sizes.push_back(size);
      ++report.event_artist_deciles[std::min<std::size_t>(9, 10 * rank[i] / n)];
    }
  }
  report.event_artist_count = event_sizes.size();
  if (!event_sizes.empty()) {
    const std::size_t bottom =
        report.event_artist_deciles[7] + report.event_artist_deciles[8] + report.event_artist_deciles[9];
    report.bottom_three_decile_share = static_cast<double>(bottom) / static_cast<double>(event_sizes.size());
  }
  report.footprint_rank_correlation = pearson(footprint, ranks);

  const auto cdf = [](std::vector<std::size_t> sizes) {
    std::sort(sizes.begin(), sizes.end());
    std::vector<CdfPoint> points;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (i + 1 < sizes.size() && sizes[i + 1] == sizes[i]) continue;
      points.push_back({sizes[i], static_cast<double>(i + 1) / static_cast<double>(sizes.size())});
    }
    return points;
  };
  const auto share_at_most = [](const std::vector<std::size_t>& sizes, std::size_t limit) {
    if (sizes.empty()) return 0.0;
    const auto count = std::count_if(sizes.begin(), sizes.end(), [&](std::size_t s) { return s <= limit; });
    return static_cast<double>(count) / static_cast<double>(sizes.size());
  };
  report.footprint_cdf_all = cdf(all_sizes);
  report.footprint_cdf_event = cdf(event_sizes);
  report.all_share_at_most_15 = share_at_most(all_sizes, 15);
  report.event_share_at_most_15 = share_at_most(event_sizes, 15);
  return report;
}

std::string_view to_string(PreferenceSource source) noexcept {
  switch (source) {
    case PreferenceSource::artists: return "artists";
    case PreferenceSource::genres: return "genres";
    case PreferenceSource::both: return "both";
  }
  return "both";
}

std::optional<PreferenceSource> parse_preference_source(std::string_view text) noexcept {
  if (text == "artists") return PreferenceSource::artists;
  if (text == "genres") return PreferenceSource::genres;
  if (text == "both") return PreferenceSource::both;
  return std::nullopt;
}

UserPreferences select(const UserPreferences& preferences, PreferenceSource source) {
  UserPreferences out;
  if (source != PreferenceSource::artists) out.genre_tag_ids = preferences.genre_tag_ids;
  if (source != PreferenceSource::genres) out.popular_artist_ids = preferences.popular_artist_ids;
  return out;
}

std::vector<UserGroundTruth> simulate_users(const MusicEventGraph& graph, const SimulationConfig& config) {
  if (config.min_relevant == 0 || config.min_relevant > config.max_relevant) {
    throw Error(ErrorKind::InvalidConfig, "relevant set bounds must satisfy 1 <= min <= max");
  }
  if (config.max_genres == 0 || config.max_artists_per_genre == 0) {
    throw Error(ErrorKind::InvalidConfig, "users must pick at least one genre and one artist");
  }
  std::vector<const LatentVector*> vectors;
  std::vector<const std::string*> ids;
  for (const auto& ea : graph.event_artists()) {
    if (!ea.embedded) continue;
    vectors.push_back(&ea.vector);
    ids.push_back(&ea.id);
  }
  if (vectors.size() <= config.min_relevant) {
    throw Error(ErrorKind::InvalidConfig, "too few embedded event artists to simulate users");
  }
  if (graph.genres().empty()) throw Error(ErrorKind::InvalidConfig, "graph has no genre tags");
  std::vector<const LatentVector*> genre_vectors;
  std::vector<const std::string*> genre_ids;
  for (const auto& g : graph.genres()) {
    genre_vectors.push_back(&g.vector);
    genre_ids.push_back(&g.id);
  }

  std::vector<UserGroundTruth> users;
  users.reserve(config.users);
  for (std::size_t u = 0; u < config.users; ++u) {
    std::mt19937_64 rng(mix(config.seed, u));
    std::normal_distribution<double> jitter(0.0, config.center_jitter);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto draw = [&](std::size_t lo, std::size_t hi) {
      return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };

    const LatentVector& anchor = *vectors[draw(0, vectors.size() - 1)];
    LatentVector center = anchor / std::max(anchor.norm(), kZeroNorm);
    for (Eigen::Index d = 0; d < center.size(); ++d) center(d) += jitter(rng);
    center /= std::max(center.norm(), kZeroNorm);

    const auto ranked = top_by_cosine(center, vectors, ids);
    const std::size_t n_relevant = std::min(draw(config.min_relevant, config.max_relevant), vectors.size() - 1);
    std::vector<std::size_t> relevant(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_relevant));
    std::vector<bool> is_relevant(vectors.size(), false);
    for (const auto r : relevant) is_relevant[r] = true;
    for (auto& r : relevant) {
      if (unit(rng) >= config.relevance_noise) continue;
      const std::size_t swap = draw(0, vectors.size() - 1);
      if (is_relevant[swap]) continue;
      is_relevant[r] = false;
      is_relevant[swap] = true;
      r = swap;
    }

    UserGroundTruth user;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (is_relevant[i]) user.relevant_event_artist_ids.push_back(*ids[i]);
    }
    const auto genre_order = top_by_cosine(center, genre_vectors, genre_ids);
    const std::size_t n_genres = std::min(draw(1, config.max_genres), genre_order.size());
    for (std::size_t g = 0; g < n_genres; ++g) {
      const std::string& genre = *genre_ids[genre_order[g]];
      user.preferences.genre_tag_ids.push_back(genre);
      std::vector<const LatentVector*> offered;
      std::vector<const std::string*> offered_ids;
      for (const auto* p : graph.popular_for_genre(genre)) {
        offered.push_back(&p->vector);
        offered_ids.push_back(&p->id);
      }
      const std::size_t want = draw(1, config.max_artists_per_genre);
      std::size_t taken = 0;
      for (const auto idx : top_by_cosine(center, offered, offered_ids)) {
        if (taken == want) break;
        auto& chosen = user.preferences.popular_artist_ids;
        if (std::find(chosen.begin(), chosen.end(), *offered_ids[idx]) != chosen.end()) continue;
        chosen.push_back(*offered_ids[idx]);
        ++taken;
      }
    }
    users.push_back(std::move(user));
  }
  return users;
}

const FusionCell* FusionSweepReport::find(const FusionConfig& config, PreferenceSource source) const {
  const auto label = to_string(config);
  for (const auto& cell : cells) {
    if (cell.label == label && cell.source == source) return &cell;
  }
  return nullptr;
}

FusionSweepReport fusion_sweep(const MusicEventGraph& graph, std::span<const UserGroundTruth> users,
                               std::span<const FusionConfig> configs, std::span<const PreferenceSource> sources,
                               std::uint64_t seed) {
  std::vector<Candidate> candidates;
  std::vector<std::string> candidate_ids;
  std::vector<std::pair<std::uint64_t, std::string>> by_listeners;
  for (const auto& ea : graph.event_artists()) {
    if (!ea.embedded) continue;
    candidates.push_back({ea.id, ea.vector});
    candidate_ids.push_back(ea.id);
    by_listeners.emplace_back(ea.listener_count, ea.id);
  }
  std::sort(by_listeners.begin(), by_listeners.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> popularity_order;
  for (auto& [count, id] : by_listeners) popularity_order.push_back(id);

  std::vector<std::unordered_set<std::string>> relevant(users.size());
  std::vector<bool> usable(users.size(), false);
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (const auto& id : users[u].relevant_event_artist_ids) {
      if (graph.find_event_artist(id) == nullptr) throw Error(ErrorKind::UnknownEntity, "event artist '" + id + "'");
      if (std::find(candidate_ids.begin(), candidate_ids.end(), id) != candidate_ids.end()) relevant[u].insert(id);
    }
    usable[u] = !relevant[u].empty() && relevant[u].size() < candidates.size();
  }

  const auto preference_vectors = [&](const UserPreferences& prefs) {
    std::vector<LatentVector> vectors;
    for (const auto& id : prefs.genre_tag_ids) {
      const auto* g = graph.find_genre(id);
      if (g == nullptr) throw Error(ErrorKind::UnknownEntity, "genre tag '" + id + "'");
      vectors.push_back(g->vector);
    }
    for (const auto& id : prefs.popular_artist_ids) {
      const auto* p = graph.find_popular(id);
      if (p == nullptr) throw Error(ErrorKind::UnknownEntity, "popular artist '" + id + "'");
      vectors.push_back(p->vector);
    }
    return vectors;
  };

  FusionSweepReport report;
  for (const auto& config : configs) {
    for (const auto source : sources) {
      std::vector<double> values;
      for (std::size_t u = 0; u < users.size(); ++u) {
        if (!usable[u]) continue;
        const auto prefs = select(users[u].preferences, source);
        if (prefs.empty()) continue;
        const auto scores = rank_event_artists(preference_vectors(prefs), config, candidates, mix(seed, u));
        std::vector<std::string> order;
        order.reserve(scores.size());
        for (const auto& s : scores) order.push_back(s.id);
        values.push_back(auc(order, relevant[u]));
      }
      report.cells.push_back(summarize_cell(to_string(config), source, values));
    }
  }

  std::vector<double> random_values;
  std::vector<double> popularity_values;
  for (std::size_t u = 0; u < users.size(); ++u) {
    if (!usable[u]) continue;
    std::vector<std::string> shuffled(candidate_ids);
    std::mt19937_64 rng(mix(seed, u, 0x72616e646f6dULL));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    random_values.push_back(auc(shuffled, relevant[u]));
    popularity_values.push_back(auc(popularity_order, relevant[u]));
  }
  report.random = summarize_cell("random", PreferenceSource::both, random_values);
  report.popularity = summarize_cell("popularity", PreferenceSource::both, popularity_values);
  return report;
}

}  // namespace eventrec
