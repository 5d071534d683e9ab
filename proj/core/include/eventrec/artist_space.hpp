#pragma once

// Raw artist/tag affinity matrix and the LSA embedding index built on it.
//
// Columns of the raw matrix are features: the first |artists| columns are the
// artists themselves (artist similarity block, unit diagonal), the remaining
// columns are tags. Every feature is embedded as a column of diag(sigma) V^T,
// so artists and tags share one k-dimensional space.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eventrec/corpus.hpp"
#include "eventrec/linalg.hpp"

namespace eventrec {

enum class FeatureKind { artist, tag };
enum class FeatureFilter { any, artists, tags };

struct ScoredFeature {
  FeatureId id;
  double score = 0.0;

  friend bool operator==(const ScoredFeature&, const ScoredFeature&) = default;
};

// Ordered artist and tag ids plus the id -> column lookup shared by the raw
// matrix and the embedding index.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::vector<ArtistId> artists, std::vector<TagId> tags);

  std::size_t artist_count() const noexcept { return artist_count_; }
  std::size_t tag_count() const noexcept { return features_.size() - artist_count_; }
  std::size_t size() const noexcept { return features_.size(); }

  std::span<const FeatureId> features() const noexcept { return features_; }
  std::span<const FeatureId> artists() const noexcept {
    return std::span<const FeatureId>(features_).first(artist_count_);
  }
  std::span<const FeatureId> tags() const noexcept {
    return std::span<const FeatureId>(features_).subspan(artist_count_);
  }

  bool contains(const FeatureId& id) const { return column_of_.contains(id); }
  std::optional<std::size_t> column(const FeatureId& id) const;
  // Throws UnknownEntity.
  std::size_t require(const FeatureId& id) const;
  FeatureKind kind(std::size_t column) const noexcept {
    return column < artist_count_ ? FeatureKind::artist : FeatureKind::tag;
  }
  bool accepts(std::size_t column, FeatureFilter filter) const noexcept;

  // Raw feature vector over this space; unknown ids throw UnknownEntity and
  // weights outside [0, 1] throw InvalidWeight. Repeated ids keep the maximum.
  SparseVector vector(std::span<const std::pair<FeatureId, double>> entries) const;

 private:
  std::vector<FeatureId> features_;
  std::size_t artist_count_ = 0;
  std::unordered_map<FeatureId, std::size_t> column_of_;
};

struct RawDataMatrix {
  SparseMatrix matrix;  // |artists| x (|artists| + |tags|)
  FeatureSpace space;
};

// Stacks the artist similarity block next to the artist-tag block. Zero
// weights are dropped (absent and zero affinity are the same thing), repeated
// (artist, feature) pairs keep the larger weight and every diagonal is 1.
// Throws UnknownEntity for dangling ids and InvalidWeight outside [0, 1].
RawDataMatrix build_raw_matrix(std::span<const Artist> artists, std::span<const Tag> tags,
                               std::span<const AffinityRecord> affinities);

class EmbeddingIndex {
 public:
  static constexpr std::size_t kDefaultRank = 64;
  static constexpr std::size_t kMaxRank = 512;

  EmbeddingIndex(TruncatedSvd svd, FeatureSpace space);

  const TruncatedSvd& svd() const noexcept { return svd_; }
  const FeatureSpace& space() const noexcept { return space_; }
  std::size_t rank() const noexcept { return svd_.rank(); }

  // k x |features|, column j embeds feature j.
  const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }
  LatentVector embedding(const FeatureId& id) const;
  double similarity(const FeatureId& a, const FeatureId& b) const;

  // Fold-in rescaled into the column space: x V diag(sigma). Throws
  // SingularSpace when the factorization has a zero singular value.
  LatentVector embed_new_artist(const SparseVector& affinities) const;

  // Top-n by cosine excluding the query itself; ties by ascending id.
  std::vector<ScoredFeature> similar(const FeatureId& id, std::size_t n,
                                     FeatureFilter filter = FeatureFilter::any) const;
  std::vector<ScoredFeature> nearest(const LatentVector& query, std::size_t n,
                                     FeatureFilter filter = FeatureFilter::any,
                                     std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  TruncatedSvd svd_;
  FeatureSpace space_;
  Eigen::MatrixXd embeddings_;
  Eigen::MatrixXd unit_embeddings_;
};

// Throws InvalidRank unless 1 <= k <= kMaxRank (and the matrix can support k).
EmbeddingIndex fit(const RawDataMatrix& raw, std::size_t k = EmbeddingIndex::kDefaultRank,
                   std::uint64_t seed = 0, const SvdOptions& options = {});

// Same ranking contract as EmbeddingIndex::similar but on raw matrix columns,
// without any factorization.
std::vector<ScoredFeature> similar_raw(const RawDataMatrix& raw, const FeatureId& id, std::size_t n,
                                       FeatureFilter filter = FeatureFilter::any);

}  // namespace eventrec
