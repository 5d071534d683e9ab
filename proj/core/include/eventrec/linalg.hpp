#pragma once

// Sparse storage and the numerical kernels behind the latent space:
// randomized truncated SVD, column embeddings, fold-in and cosine similarity.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace eventrec {

using LatentVector = Eigen::VectorXd;

inline constexpr double kOrthonormalityTolerance = 1e-8;
inline constexpr double kOracleRelativeTolerance = 1e-6;
inline constexpr double kSingularCutoff = 1e-12;
inline constexpr double kZeroNorm = 1e-12;

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Sorted, duplicate-free sparse vector of a fixed logical length.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t size) : size_(size) {}
  // Entries may come in any order; duplicates, out-of-range indices and
  // non-finite values are rejected. Explicit zeros are dropped.
  SparseVector(std::size_t size, std::vector<std::pair<std::size_t, double>> entries);

  std::size_t size() const noexcept { return size_; }
  std::size_t nnz() const noexcept { return indices_.size(); }
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::span<const double> values() const noexcept { return values_; }

  double norm() const;
  double dot(const SparseVector& other) const;
  SparseVector scaled(double factor) const;
  Eigen::VectorXd to_dense() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

// Row-major sparse matrix. Stored values are finite and nonzero, with no
// duplicate coordinates.
class SparseMatrix {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;

  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::span<const Triplet> entries);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(storage_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(storage_.cols()); }
  std::size_t nnz() const noexcept { return static_cast<std::size_t>(storage_.nonZeros()); }

  const Storage& storage() const noexcept { return storage_; }

  SparseVector row(std::size_t i) const;
  std::size_t row_nnz(std::size_t i) const;
  double coeff(std::size_t row, std::size_t col) const;
  double frobenius_norm() const;
  Eigen::MatrixXd to_dense() const;
  std::vector<Triplet> triplets() const;

  // Keeps the listed rows and columns, in the given order.
  SparseMatrix submatrix(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

 private:
  Storage storage_;
};

struct SvdOptions {
  std::size_t oversampling = 8;
  // Subspace iteration runs at least this many power steps, then continues
  // until the leading singular value estimates stop moving.
  std::size_t min_power_iterations = 4;
  std::size_t max_power_iterations = 2000;
  // Stop when every requested estimate changes by less than tolerance * sigma_1.
  double tolerance = 1e-13;
};

struct TruncatedSvd {
  Eigen::MatrixXd u;      // rows x k
  Eigen::VectorXd sigma;  // k, nonincreasing
  Eigen::MatrixXd v;      // cols x k
  std::size_t iterations = 0;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(sigma.size()); }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(u.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(v.rows()); }
};

// Leading k singular triplets of x by seeded randomized subspace iteration.
// Each V column is sign-normalized so its largest-magnitude entry is positive.
// Throws InvalidRank unless 1 <= k <= min(rows, cols); DegenerateInput for an
// all-zero matrix.
TruncatedSvd truncated_svd(const SparseMatrix& x, std::size_t k, std::uint64_t seed,
                           const SvdOptions& options = {});

// diag(sigma) * V^T: one k-dimensional embedding per source column.
Eigen::MatrixXd feature_embeddings(const TruncatedSvd& svd);

// x * V * diag(1/sigma). Throws SingularSpace if any sigma <= kSingularCutoff.
LatentVector fold_in(const SparseVector& x, const TruncatedSvd& svd);

// Cosine similarity; 0 when either vector has norm <= kZeroNorm.
double cosine(const LatentVector& p, const LatentVector& q);

}  // namespace eventrec
