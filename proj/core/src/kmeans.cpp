#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eventrec/error.hpp"
#include "eventrec/fusion.hpp"

namespace eventrec {
namespace {

std::size_t closest(const LatentVector& point, std::span<const LatentVector> centroids) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = (point - centroids[c]).squaredNorm();
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

std::vector<LatentVector> plus_plus_seeds(std::span<const LatentVector> points, std::size_t clusters,
                                          std::mt19937_64& rng) {
  std::vector<LatentVector> centroids;
  std::vector<bool> taken(points.size(), false);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  const std::size_t start = first(rng);
  centroids.push_back(points[start]);
  taken[start] = true;

  std::vector<double> distance(points.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centroids.size() < clusters) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) d = std::min(d, (points[i] - c).squaredNorm());
      distance[i] = taken[i] ? 0.0 : d;
      total += distance[i];
    }
    std::size_t pick = points.size();
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (distance[i] <= 0.0) continue;
        pick = i;
        target -= distance[i];
        if (target <= 0.0) break;
      }
    } else {
      // All remaining points coincide with a centroid.
      for (std::size_t i = 0; i < points.size() && pick == points.size(); ++i) {
        if (!taken[i]) pick = i;
      }
    }
    taken[pick] = true;
    centroids.push_back(points[pick]);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const LatentVector> points, std::size_t clusters, std::uint64_t seed,
                    const KMeansOptions& options) {
  if (clusters == 0 || clusters > points.size()) {
    throw Error(ErrorKind::InvalidConfig, "cannot form " + std::to_string(clusters) + " clusters from " +
                                              std::to_string(points.size()) + " points");
  }
  std::mt19937_64 rng(seed);
  KMeansResult result;
  result.centroids = plus_plus_seeds(points, clusters, rng);
  result.assignment.assign(points.size(), 0);

  const Eigen::Index dim = points.front().size();
  while (result.iterations < options.max_iterations) {
    for (std::size_t i = 0; i < points.size(); ++i) result.assignment[i] = closest(points[i], result.centroids);

    std::vector<LatentVector> sums(clusters, LatentVector::Zero(dim));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[result.assignment[i]] += points[i];
      ++counts[result.assignment[i]];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      const LatentVector updated = sums[c] / static_cast<double>(counts[c]);
      shift = std::max(shift, (updated - result.centroids[c]).norm());
      result.centroids[c] = updated;
    }
    ++result.iterations;
    if (shift < options.tolerance) break;
  }
  for (std::size_t i = 0; i < points.size(); ++i) result.assignment[i] = closest(points[i], result.centroids);
  return result;
}

std::size_t cluster_count(std::size_t preferences) noexcept {
  if (preferences <= 1) return 1;
  const auto rounded = static_cast<std::size_t>(std::llround(std::log(static_cast<double>(preferences))));
  return std::max<std::size_t>(1, rounded);
}

}  // namespace eventrec
