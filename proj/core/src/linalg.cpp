#include "eventrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "eventrec/error.hpp"

namespace eventrec {
namespace {

using Index = Eigen::Index;

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

Eigen::MatrixXd gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  // Column-major fill keeps the draw order independent of Eigen internals.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace

SparseVector::SparseVector(std::size_t size, std::vector<std::pair<std::size_t, double>> entries)
    : size_(size) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  indices_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [index, value] = entries[i];
    if (index >= size) {
      throw Error(ErrorKind::DimensionMismatch,
                  "sparse vector index " + std::to_string(index) + " >= length " + std::to_string(size));
    }
    if (i > 0 && entries[i - 1].first == index) {
      throw Error(ErrorKind::InvalidMatrix, "duplicate sparse vector index " + std::to_string(index));
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorKind::InvalidMatrix, "non-finite sparse vector value");
    }
    if (value == 0.0) continue;
    indices_.push_back(index);
    values_.push_back(value);
  }
}

double SparseVector::norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

double SparseVector::dot(const SparseVector& other) const {
  if (other.size_ != size_) {
    throw Error(ErrorKind::DimensionMismatch, "sparse dot of vectors with different lengths");
  }
  double sum = 0.0;
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < indices_.size() && b < other.indices_.size()) {
    if (indices_[a] == other.indices_[b]) {
      sum += values_[a++] * other.values_[b++];
    } else if (indices_[a] < other.indices_[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  return sum;
}

SparseVector SparseVector::scaled(double factor) const {
  SparseVector out(size_);
  if (factor == 0.0) return out;
  out.indices_ = indices_;
  out.values_ = values_;
  for (double& v : out.values_) v *= factor;
  return out;
}

Eigen::VectorXd SparseVector::to_dense() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Index>(size_));
  for (std::size_t i = 0; i < indices_.size(); ++i) out(static_cast<Index>(indices_[i])) = values_[i];
  return out;
}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::span<const Triplet> entries)
    : storage_(static_cast<Index>(rows), static_cast<Index>(cols)) {
  std::vector<Eigen::Triplet<double, std::int64_t>> kept;
  kept.reserve(entries.size());
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorKind::InvalidMatrix, "entry (" + std::to_string(t.row) + ", " +
                                                std::to_string(t.col) + ") out of bounds");
    }
    if (!std::isfinite(t.value)) throw Error(ErrorKind::InvalidMatrix, "stored values must be finite");
    if (t.value == 0.0) continue;
    kept.emplace_back(static_cast<std::int64_t>(t.row), static_cast<std::int64_t>(t.col), t.value);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
  });
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (kept[i].row() == kept[i - 1].row() && kept[i].col() == kept[i - 1].col()) {
      throw Error(ErrorKind::InvalidMatrix, "duplicate entry (" + std::to_string(kept[i].row()) +
                                                ", " + std::to_string(kept[i].col()) + ")");
    }
  }
  storage_.setFromTriplets(kept.begin(), kept.end());
  storage_.makeCompressed();
}

SparseVector SparseMatrix::row(std::size_t i) const {
  std::vector<std::pair<std::size_t, double>> entries;
  for (Storage::InnerIterator it(storage_, static_cast<Index>(i)); it; ++it) {
    entries.emplace_back(static_cast<std::size_t>(it.col()), it.value());
  }
  return SparseVector(cols(), std::move(entries));
}

std::size_t SparseMatrix::row_nnz(std::size_t i) const {
  const auto* outer = storage_.outerIndexPtr();
  return static_cast<std::size_t>(outer[i + 1] - outer[i]);
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const {
  return storage_.coeff(static_cast<Index>(row), static_cast<Index>(col));
}

double SparseMatrix::frobenius_norm() const { return storage_.norm(); }

Eigen::MatrixXd SparseMatrix::to_dense() const { return Eigen::MatrixXd(storage_); }

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (Index r = 0; r < storage_.outerSize(); ++r) {
    for (Storage::InnerIterator it(storage_, r); it; ++it) {
      out.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()), it.value()});
    }
  }
  return out;
}

SparseMatrix SparseMatrix::submatrix(std::span<const std::size_t> rows,
                                     std::span<const std::size_t> cols) const {
  std::vector<std::int64_t> col_map(this->cols(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map.at(cols[j]) = static_cast<std::int64_t>(j);
  std::vector<Triplet> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Storage::InnerIterator it(storage_, static_cast<Index>(rows[i])); it; ++it) {
      const auto mapped = col_map[static_cast<std::size_t>(it.col())];
      if (mapped >= 0) kept.push_back({i, static_cast<std::size_t>(mapped), it.value()});
    }
  }
  return SparseMatrix(rows.size(), cols.size(), kept);
}

TruncatedSvd truncated_svd(const SparseMatrix& x, std::size_t k, std::uint64_t seed,
                           const SvdOptions& options) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (k < 1 || k > std::min(m, n)) {
    throw Error(ErrorKind::InvalidRank, "rank " + std::to_string(k) + " outside [1, " +
                                            std::to_string(std::min(m, n)) + "]");
  }
  if (x.nnz() == 0) throw Error(ErrorKind::DegenerateInput, "matrix has no nonzero entries");

  const auto& a = x.storage();
  const Index rank = static_cast<Index>(k);
  const Index width = static_cast<Index>(std::min(k + options.oversampling, std::min(m, n)));

  Eigen::MatrixXd q = orthonormal_basis(a * gaussian(static_cast<Index>(n), width, seed));
  Eigen::VectorXd previous = Eigen::VectorXd::Constant(rank, -1.0);
  std::size_t iterations = 0;
  while (iterations < options.max_power_iterations) {
    const Eigen::MatrixXd w = orthonormal_basis(a.transpose() * q);
    const Eigen::MatrixXd y = a * w;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), width);
    ++iterations;

    // Singular values of R equal those of A*W, the current Ritz estimates.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(width).triangularView<Eigen::Upper>();
    const Eigen::VectorXd estimate = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues().head(rank);
    const double shift = (estimate - previous).cwiseAbs().maxCoeff();
    previous = estimate;
    if (iterations >= options.min_power_iterations && shift <= options.tolerance * estimate(0)) break;
  }

  // Rayleigh-Ritz on B = Q^T A, computed through its transpose.
  const Eigen::MatrixXd bt = a.transpose() * q;
  Eigen::BDCSVD<Eigen::MatrixXd> small(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);

  TruncatedSvd out;
  out.iterations = iterations;
  out.sigma = small.singularValues().head(rank);
  out.v = small.matrixU().leftCols(rank);
  out.u = q * small.matrixV().leftCols(rank);

  for (Index j = 0; j < rank; ++j) {
    Index pivot = 0;
    out.v.col(j).cwiseAbs().maxCoeff(&pivot);
    if (out.v(pivot, j) < 0.0) {
      out.v.col(j) *= -1.0;
      out.u.col(j) *= -1.0;
    }
  }
  return out;
}

Eigen::MatrixXd feature_embeddings(const TruncatedSvd& svd) {
  return svd.sigma.asDiagonal() * svd.v.transpose();
}

LatentVector fold_in(const SparseVector& x, const TruncatedSvd& svd) {
  if (x.size() != svd.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "fold-in vector length " + std::to_string(x.size()) +
                                                  " != " + std::to_string(svd.cols()));
  }
  for (Index j = 0; j < svd.sigma.size(); ++j) {
    if (svd.sigma(j) <= kSingularCutoff) {
      throw Error(ErrorKind::SingularSpace, "singular value " + std::to_string(j) + " is zero");
    }
  }
  LatentVector out = LatentVector::Zero(svd.sigma.size());
  const auto idx = x.indices();
  const auto val = x.values();
  for (std::size_t i = 0; i < idx.size(); ++i) out += val[i] * svd.v.row(static_cast<Index>(idx[i])).transpose();
  return out.cwiseQuotient(svd.sigma);
}

double cosine(const LatentVector& p, const LatentVector& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cosine of vectors with different dimensions");
  }
  const double np = p.norm();
  const double nq = q.norm();
  if (np <= kZeroNorm || nq <= kZeroNorm) return 0.0;
  return std::clamp(p.dot(q) / (np * nq), -1.0, 1.0);
}

}  // namespace eventrec
