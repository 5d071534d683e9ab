#pragma once

// Evaluation harness: AUC, the reduced-footprint experiment, long-tail
// statistics and the fusion sweep over simulated users.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "eventrec/artist_space.hpp"
#include "eventrec/corpus.hpp"
#include "eventrec/event_graph.hpp"
#include "eventrec/fusion.hpp"

namespace eventrec {

// AUC of a total order given as relevance labels in rank order: the share of
// (relevant, non-relevant) pairs where the relevant one comes first.
// Throws UndefinedMetric when every label is equal (or there are none).
double auc(std::span<const bool> labels_in_rank_order);

// Same on ids; every relevant id must appear in the ranking (UnknownEntity).
double auc(std::span<const std::string> ranking, const std::unordered_set<std::string>& relevant);

inline constexpr std::size_t kFullFootprint = std::numeric_limits<std::size_t>::max();

struct FootprintExperimentConfig {
  std::size_t train_size = 1800;
  std::size_t test_size = 200;
  std::vector<std::size_t> footprint_sizes{1, 2, 4, 8, 16, 32, 64, 128, 256};
  std::vector<std::size_t> ranks{32, 64, 128, 256};
  bool include_raw_baseline = true;
  std::uint64_t seed = 0;
  // Looser than the library default: AUC only needs the leading subspace.
  SvdOptions svd{8, 4, 60, 1e-7};
  std::size_t threads = 0;  // 0: hardware concurrency
};

struct FootprintRow {
  std::string method;     // "lsa" or "raw"
  std::size_t rank = 0;   // 0 for raw
  std::size_t footprint = 0;
  double mean_auc = 0.0;
  std::size_t evaluated = 0;
};

struct FootprintExperimentResult {
  FootprintExperimentConfig config;
  std::vector<ArtistId> test_artists;
  std::size_t skipped = 0;  // test artists without any ground-truth link
  std::vector<FootprintRow> rows;

  const FootprintRow* find(std::string_view method, std::size_t rank, std::size_t footprint) const;
};

// Test rows and columns are removed before factorizing; reduced test vectors
// are folded in and rescaled into the column space, x V diag(sigma).
// Ground truth for test artist i: test artists j != i with X(i, j) != 0.
// Throws InvalidConfig when the split does not match the artist count.
FootprintExperimentResult footprint_experiment(const RawDataMatrix& raw, const FootprintExperimentConfig& config);

// Uniform subset of min(budget, nnz) nonzeros, deterministic in seed.
SparseVector reduce_footprint(const SparseVector& x, std::size_t budget, std::uint64_t seed);

struct CdfPoint {
  std::size_t footprint = 0;
  double cumulative = 0.0;
};

struct LongTailReport {
  std::size_t artist_count = 0;
  std::size_t event_artist_count = 0;
  std::size_t top_coverage_count = 0;  // artists needed for 80% of listens
  double top_coverage_fraction = 0.0;
  std::array<std::size_t, 10> event_artist_deciles{};  // decile 0 = most popular
  double bottom_three_decile_share = 0.0;
  std::vector<CdfPoint> footprint_cdf_all;
  std::vector<CdfPoint> footprint_cdf_event;
  double footprint_rank_correlation = 0.0;
  double all_share_at_most_15 = 0.0;
  double event_share_at_most_15 = 0.0;
};

// Popularity rank orders artists by listener count desc, then id. Footprint
// is the number of nonzeros in the artist's row of the raw matrix.
LongTailReport long_tail_stats(const CorpusBundle& corpus);

double pearson(std::span<const double> x, std::span<const double> y);

enum class PreferenceSource { artists, genres, both };
std::string_view to_string(PreferenceSource source) noexcept;
std::optional<PreferenceSource> parse_preference_source(std::string_view text) noexcept;

struct UserGroundTruth {
  UserPreferences preferences;
  std::vector<ArtistId> relevant_event_artist_ids;
};

struct SimulationConfig {
  std::size_t users = 200;
  std::size_t min_relevant = 5;
  std::size_t max_relevant = 15;
  double relevance_noise = 0.2;  // chance each relevant artist is swapped at random
  double center_jitter = 0.05;
  std::size_t max_genres = 3;
  std::size_t max_artists_per_genre = 3;
  std::uint64_t seed = 0;
};

// Planted-taste users: a taste center near a random embedded event artist,
// the closest event artists relevant (with noise), and preferences taken from
// the genre tags and offered popular artists closest to the center.
std::vector<UserGroundTruth> simulate_users(const MusicEventGraph& graph, const SimulationConfig& config);

// Restricts a user's preferences to one source.
UserPreferences select(const UserPreferences& preferences, PreferenceSource source);

struct FusionCell {
  std::string label;  // fusion config, "random" or "popularity"
  PreferenceSource source = PreferenceSource::both;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t users = 0;
};

struct FusionSweepReport {
  std::vector<FusionCell> cells;
  FusionCell random;
  FusionCell popularity;

  const FusionCell* find(const FusionConfig& config, PreferenceSource source) const;
};

// Per (config, source) mean/std of per-user AUC over the embedded event
// artists. Users whose preferences are empty for a source are left out of
// that cell.
FusionSweepReport fusion_sweep(const MusicEventGraph& graph, std::span<const UserGroundTruth> users,
                               std::span<const FusionConfig> configs, std::span<const PreferenceSource> sources,
                               std::uint64_t seed = 0);

// Versioned JSON, CSV tables and plot descriptions (x/y series per curve).
nlohmann::json to_json(const FootprintExperimentResult& result);
std::string to_csv(const FootprintExperimentResult& result);
nlohmann::json plot_description(const FootprintExperimentResult& result);
nlohmann::json to_json(const LongTailReport& report);
std::string to_csv(const LongTailReport& report);
nlohmann::json plot_description(const LongTailReport& report);
nlohmann::json to_json(const FusionSweepReport& report);
std::string to_csv(const FusionSweepReport& report);

}  // namespace eventrec
