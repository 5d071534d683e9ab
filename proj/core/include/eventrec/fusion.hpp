#pragma once

// Early/late fusion of several preference vectors into one ranking of
// candidate (event) artists.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eventrec/corpus.hpp"
#include "eventrec/linalg.hpp"

namespace eventrec {

class EmbeddingIndex;

enum class EarlyFusion { none, average, cluster };
enum class LateFusion { average_cosine, average_rank, interleave };

struct FusionConfig {
  EarlyFusion early = EarlyFusion::none;
  LateFusion late = LateFusion::average_cosine;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

std::string_view to_string(EarlyFusion mode) noexcept;
std::string_view to_string(LateFusion mode) noexcept;
std::string to_string(const FusionConfig& config);
std::optional<EarlyFusion> parse_early_fusion(std::string_view text) noexcept;
std::optional<LateFusion> parse_late_fusion(std::string_view text) noexcept;
// "early/late", e.g. "none/average_cosine".
std::optional<FusionConfig> parse_fusion_config(std::string_view text) noexcept;
// The seven combinations evaluated in the fusion sweep.
std::vector<FusionConfig> standard_fusion_configs();

struct UserPreferences {
  std::vector<TagId> genre_tag_ids;
  std::vector<ArtistId> popular_artist_ids;

  bool empty() const noexcept { return genre_tag_ids.empty() && popular_artist_ids.empty(); }
  // Genres first, then artists, each in selection order.
  std::vector<FeatureId> all() const;
};

struct Candidate {
  std::string id;
  LatentVector vector;
};

// score is mode specific: mean cosine, mean 1-based rank, or 1-based
// interleave position.
struct RankedCandidate {
  std::string id;
  double score = 0.0;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};
using Ranking = std::vector<RankedCandidate>;

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
};

struct KMeansResult {
  std::vector<LatentVector> centroids;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
};

// Lloyd iterations from a seeded k-means++ start. Throws InvalidConfig when
// clusters is 0 or exceeds the number of points.
KMeansResult kmeans(std::span<const LatentVector> points, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options = {});

// round(ln n), never below 1.
std::size_t cluster_count(std::size_t preferences) noexcept;

std::vector<LatentVector> early_fuse(std::span<const LatentVector> vectors, EarlyFusion mode,
                                     std::uint64_t seed = 0);

// One cosine ranking per preference: score desc, then id asc.
std::vector<Ranking> per_preference_rankings(std::span<const LatentVector> preferences,
                                             std::span<const Candidate> candidates);

Ranking late_fuse_average_cosine(std::span<const LatentVector> preferences,
                                 std::span<const Candidate> candidates);
Ranking late_fuse_average_rank(std::span<const LatentVector> preferences,
                               std::span<const Candidate> candidates);
Ranking late_fuse_interleave(std::span<const LatentVector> preferences, std::span<const Candidate> candidates);

struct ArtistScore {
  ArtistId id;
  // Cardinal score handed to event aggregation: mean cosine for
  // average_cosine, (N - mean_rank + 1) / N for the rank-based modes.
  double score = 0.0;
  // The late-fusion score before conversion.
  double raw = 0.0;

  friend bool operator==(const ArtistScore&, const ArtistScore&) = default;
};

// early_fuse followed by the configured late fusion. Throws EmptyPreferences
// for an empty preference list.
std::vector<ArtistScore> rank_event_artists(std::span<const LatentVector> preferences,
                                            const FusionConfig& config, std::span<const Candidate> candidates,
                                            std::uint64_t seed = 0);

std::vector<ArtistScore> rank_event_artists(const UserPreferences& preferences, const FusionConfig& config,
                                            const EmbeddingIndex& index, std::span<const ArtistId> event_artists,
                                            std::uint64_t seed = 0);

}  // namespace eventrec
