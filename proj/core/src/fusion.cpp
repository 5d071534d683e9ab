#include "eventrec/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "eventrec/artist_space.hpp"
#include "eventrec/error.hpp"

namespace eventrec {
namespace {

void require_inputs(std::span<const LatentVector> preferences, std::span<const Candidate> candidates) {
  if (preferences.empty()) throw Error(ErrorKind::EmptyPreferences, "no preference vectors");
  if (candidates.empty()) throw Error(ErrorKind::InvalidConfig, "no candidates to rank");
}

// Unit-normalized candidate matrix (dim x N); zero-norm candidates stay zero.
Eigen::MatrixXd unit_columns(std::span<const Candidate> candidates) {
  Eigen::MatrixXd out(candidates.front().vector.size(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto& v = candidates[j].vector;
    if (v.size() != out.rows()) throw Error(ErrorKind::DimensionMismatch, "candidate dimensions differ");
    const double norm = v.norm();
    out.col(static_cast<Eigen::Index>(j)) = norm > kZeroNorm ? LatentVector(v / norm) : LatentVector::Zero(v.size());
  }
  return out;
}

Eigen::VectorXd cosine_row(const LatentVector& preference, const Eigen::MatrixXd& units) {
  if (preference.size() != units.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "preference dimension does not match candidates");
  }
  const double norm = preference.norm();
  if (norm <= kZeroNorm) return Eigen::VectorXd::Zero(units.cols());
  return (units.transpose() * (preference / norm)).cwiseMax(-1.0).cwiseMin(1.0);
}

Ranking sorted(Ranking ranking, bool descending) {
  std::sort(ranking.begin(), ranking.end(), [descending](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return descending ? a.score > b.score : a.score < b.score;
    return a.id < b.id;
  });
  return ranking;
}

}  // namespace

std::string_view to_string(EarlyFusion mode) noexcept {
  switch (mode) {
    case EarlyFusion::none: return "none";
    case EarlyFusion::average: return "average";
    case EarlyFusion::cluster: return "cluster";
  }
  return "none";
}

std::string_view to_string(LateFusion mode) noexcept {
  switch (mode) {
    case LateFusion::average_cosine: return "average_cosine";
    case LateFusion::average_rank: return "average_rank";
    case LateFusion::interleave: return "interleave";
  }
  return "average_cosine";
}

std::string to_string(const FusionConfig& config) {
  return std::string(to_string(config.early)) + "/" + std::string(to_string(config.late));
}

std::optional<EarlyFusion> parse_early_fusion(std::string_view text) noexcept {
  if (text == "none") return EarlyFusion::none;
  if (text == "average") return EarlyFusion::average;
  if (text == "cluster") return EarlyFusion::cluster;
  return std::nullopt;
}

std::optional<LateFusion> parse_late_fusion(std::string_view text) noexcept {
  if (text == "average_cosine") return LateFusion::average_cosine;
  if (text == "average_rank") return LateFusion::average_rank;
  if (text == "interleave") return LateFusion::interleave;
  return std::nullopt;
}

std::optional<FusionConfig> parse_fusion_config(std::string_view text) noexcept {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  const auto early = parse_early_fusion(text.substr(0, slash));
  const auto late = parse_late_fusion(text.substr(slash + 1));
  if (!early || !late) return std::nullopt;
  return FusionConfig{*early, *late};
}

std::vector<FusionConfig> standard_fusion_configs() {
  return {
      {EarlyFusion::none, LateFusion::average_cosine},    {EarlyFusion::none, LateFusion::average_rank},
      {EarlyFusion::none, LateFusion::interleave},        {EarlyFusion::average, LateFusion::average_cosine},
      {EarlyFusion::cluster, LateFusion::average_cosine}, {EarlyFusion::cluster, LateFusion::average_rank},
      {EarlyFusion::cluster, LateFusion::interleave},
  };
}

std::vector<FeatureId> UserPreferences::all() const {
  std::vector<FeatureId> out(genre_tag_ids);
  out.insert(out.end(), popular_artist_ids.begin(), popular_artist_ids.end());
  return out;
}

std::vector<LatentVector> early_fuse(std::span<const LatentVector> vectors, EarlyFusion mode,
                                     std::uint64_t seed) {
  if (vectors.empty()) throw Error(ErrorKind::EmptyPreferences, "no vectors to fuse");
  switch (mode) {
    case EarlyFusion::none:
      return {vectors.begin(), vectors.end()};
    case EarlyFusion::average: {
      LatentVector mean = LatentVector::Zero(vectors.front().size());
      for (const auto& v : vectors) mean += v;
      return {mean / static_cast<double>(vectors.size())};
    }
    case EarlyFusion::cluster:
      return kmeans(vectors, cluster_count(vectors.size()), seed).centroids;
  }
  return {vectors.begin(), vectors.end()};
}

std::vector<Ranking> per_preference_rankings(std::span<const LatentVector> preferences,
                                             std::span<const Candidate> candidates) {
  require_inputs(preferences, candidates);
  const Eigen::MatrixXd units = unit_columns(candidates);
  std::vector<Ranking> rankings;
  rankings.reserve(preferences.size());
  for (const auto& preference : preferences) {
    const Eigen::VectorXd scores = cosine_row(preference, units);
    Ranking ranking;
    ranking.reserve(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      ranking.push_back({candidates[j].id, scores(static_cast<Eigen::Index>(j))});
    }
    rankings.push_back(sorted(std::move(ranking), true));
  }
  return rankings;
}

Ranking late_fuse_average_cosine(std::span<const LatentVector> preferences,
                                 std::span<const Candidate> candidates) {
  require_inputs(preferences, candidates);
  const Eigen::MatrixXd units = unit_columns(candidates);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(units.cols());
  for (const auto& preference : preferences) total += cosine_row(preference, units);
  total /= static_cast<double>(preferences.size());
  Ranking ranking;
  ranking.reserve(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    ranking.push_back({candidates[j].id, total(static_cast<Eigen::Index>(j))});
  }
  return sorted(std::move(ranking), true);
}

Ranking late_fuse_average_rank(std::span<const LatentVector> preferences,
                               std::span<const Candidate> candidates) {
  const auto rankings = per_preference_rankings(preferences, candidates);
  std::unordered_map<std::string, double> rank_sum;
  for (const auto& ranking : rankings) {
    for (std::size_t position = 0; position < ranking.size(); ++position) {
      rank_sum[ranking[position].id] += static_cast<double>(position + 1);
    }
  }
  Ranking ranking;
  ranking.reserve(candidates.size());
  for (const auto& c : candidates) {
    ranking.push_back({c.id, rank_sum[c.id] / static_cast<double>(rankings.size())});
  }
  return sorted(std::move(ranking), false);
}

Ranking late_fuse_interleave(std::span<const LatentVector> preferences, std::span<const Candidate> candidates) {
  const auto rankings = per_preference_rankings(preferences, candidates);
  std::vector<std::size_t> cursor(rankings.size(), 0);
  std::unordered_set<std::string> emitted;
  Ranking out;
  out.reserve(candidates.size());
  const std::size_t total = rankings.front().size();
  while (out.size() < total) {
    for (std::size_t list = 0; list < rankings.size() && out.size() < total; ++list) {
      auto& at = cursor[list];
      while (at < rankings[list].size() && emitted.contains(rankings[list][at].id)) ++at;
      if (at == rankings[list].size()) continue;
      emitted.insert(rankings[list][at].id);
      out.push_back({rankings[list][at].id, static_cast<double>(out.size() + 1)});
    }
  }
  return out;
}

std::vector<ArtistScore> rank_event_artists(std::span<const LatentVector> preferences,
                                            const FusionConfig& config, std::span<const Candidate> candidates,
                                            std::uint64_t seed) {
  if (preferences.empty()) throw Error(ErrorKind::EmptyPreferences, "no preference vectors");
  if (candidates.empty()) return {};
  const auto fused = early_fuse(preferences, config.early, seed);

  Ranking ranking;
  switch (config.late) {
    case LateFusion::average_cosine: ranking = late_fuse_average_cosine(fused, candidates); break;
    case LateFusion::average_rank: ranking = late_fuse_average_rank(fused, candidates); break;
    case LateFusion::interleave: ranking = late_fuse_interleave(fused, candidates); break;
  }

  const double n = static_cast<double>(ranking.size());
  std::vector<ArtistScore> out;
  out.reserve(ranking.size());
  for (const auto& entry : ranking) {
    const double score = config.late == LateFusion::average_cosine ? entry.score : (n - entry.score + 1.0) / n;
    out.push_back({entry.id, score, entry.score});
  }
  return out;
}

std::vector<ArtistScore> rank_event_artists(const UserPreferences& preferences, const FusionConfig& config,
                                            const EmbeddingIndex& index, std::span<const ArtistId> event_artists,
                                            std::uint64_t seed) {
  if (preferences.empty()) throw Error(ErrorKind::EmptyPreferences, "no preferences selected");
  std::vector<LatentVector> vectors;
  for (const auto& id : preferences.all()) vectors.push_back(index.embedding(id));
  std::vector<Candidate> candidates;
  candidates.reserve(event_artists.size());
  for (const auto& id : event_artists) candidates.push_back({id, index.embedding(id)});
  return rank_event_artists(vectors, config, candidates, seed);
}

}  // namespace eventrec
