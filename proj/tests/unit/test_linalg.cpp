#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "eventrec/error.hpp"
#include "eventrec/linalg.hpp"
#include "support.hpp"

using namespace eventrec;
using testing_support::exact_rank;
using testing_support::random_sparse;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& d) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (d(i, j) != 0.0) t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), d(i, j)});
  return SparseMatrix(static_cast<std::size_t>(d.rows()), static_cast<std::size_t>(d.cols()), t);
}

// Singular values from the eigendecomposition of X^T X, largest first.
Eigen::VectorXd oracle_sigma(const SparseMatrix& x) {
  const Eigen::MatrixXd d = x.to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.transpose() * d);
  Eigen::VectorXd values = eig.eigenvalues().reverse();
  for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = std::sqrt(std::max(0.0, values[i]));
  return values;
}

double max_off_identity(const Eigen::MatrixXd& m) {
  return (m.transpose() * m - Eigen::MatrixXd::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected eventrec::Error");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("sparse storage rejects duplicates, out of range and non-finite values") {
  const std::vector<Triplet> dup{{0, 0, 1.0}, {0, 0, 2.0}};
  CHECK(kind_of([&] { SparseMatrix(2, 2, dup); }) == ErrorKind::InvalidMatrix);
  const std::vector<Triplet> oob{{2, 0, 1.0}};
  CHECK(kind_of([&] { SparseMatrix(2, 2, oob); }) == ErrorKind::InvalidMatrix);
  const std::vector<Triplet> nan{{0, 1, std::nan("")}};
  CHECK(kind_of([&] { SparseMatrix(2, 2, nan); }) == ErrorKind::InvalidMatrix);
  CHECK(kind_of([&] { SparseVector(3, {{1, 1.0}, {1, 2.0}}); }) == ErrorKind::InvalidMatrix);
  CHECK(kind_of([&] { SparseVector(3, {{3, 1.0}}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("sparse storage drops explicit zeros") {
  const std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, 0.0}};
  CHECK(SparseMatrix(2, 2, t).nnz() == 1);
  CHECK(SparseVector(4, {{2, 0.0}, {0, 3.0}}).nnz() == 1);
}

TEST_CASE("identity has unit singular values") {
  const auto svd = truncated_svd(from_dense(Eigen::MatrixXd::Identity(3, 3)), 2, 1);
  REQUIRE(svd.rank() == 2);
  CHECK(svd.sigma[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(svd.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero padded diagonal keeps its leading values") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 5);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  const auto svd = truncated_svd(from_dense(d), 2, 1);
  CHECK(svd.sigma[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(svd.sigma[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("random sparse 50x80 matches the dense eigen oracle") {
  std::mt19937_64 rng(50);
  const auto x = random_sparse(50, 80, 0.05, rng);
  const auto svd = truncated_svd(x, 10, 3);
  const auto oracle = oracle_sigma(x);
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(std::abs(svd.sigma[i] - oracle[i]) <= kOracleRelativeTolerance * oracle[i]);
  }
}

TEST_CASE("factors are orthonormal and sigma is sorted and nonnegative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_sparse(40 + 10 * trial, 60, 0.1, rng);
    const auto svd = truncated_svd(x, 8, trial);
    CHECK(max_off_identity(svd.u) <= kOrthonormalityTolerance);
    CHECK(max_off_identity(svd.v) <= kOrthonormalityTolerance);
    for (Eigen::Index i = 0; i < svd.sigma.size(); ++i) {
      CHECK(svd.sigma[i] >= 0.0);
      if (i > 0) CHECK(svd.sigma[i] <= svd.sigma[i - 1]);
    }
  }
}

TEST_CASE("exact rank matrices are reconstructed") {
  std::mt19937_64 rng(5);
  for (std::size_t r : {1u, 3u, 6u}) {
    const auto x = exact_rank(30, 45, r, rng);
    const auto svd = truncated_svd(x, r + 2, 9);
    const Eigen::MatrixXd rebuilt = svd.u * svd.sigma.asDiagonal() * svd.v.transpose();
    CHECK((rebuilt - x.to_dense()).norm() <= 1e-8 * x.frobenius_norm());
  }
}

TEST_CASE("svd is deterministic for a fixed seed and V columns are sign normalized") {
  std::mt19937_64 rng(8);
  const auto x = random_sparse(30, 30, 0.2, rng);
  const auto a = truncated_svd(x, 5, 42);
  const auto b = truncated_svd(x, 5, 42);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.sigma == b.sigma);
  for (Eigen::Index j = 0; j < a.v.cols(); ++j) {
    Eigen::Index at = 0;
    a.v.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(a.v(at, j) > 0.0);
  }
}

TEST_CASE("rank outside the valid range and all-zero input are rejected") {
  const auto x = from_dense(Eigen::MatrixXd::Identity(3, 4));
  CHECK(kind_of([&] { truncated_svd(x, 0, 0); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([&] { truncated_svd(x, 4, 0); }) == ErrorKind::InvalidRank);
  CHECK(kind_of([&] { truncated_svd(SparseMatrix(3, 3, {}), 1, 0); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("feature embeddings are sigma times V transpose") {
  SUBCASE("identity columns have unit norm") {
    const auto e = feature_embeddings(truncated_svd(from_dense(Eigen::MatrixXd::Identity(3, 3)), 3, 0));
    REQUIRE(e.cols() == 3);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(e.col(j).norm() == doctest::Approx(1.0));
  }
  SUBCASE("diag(3,2) column norms") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 3;
    d(1, 1) = 2;
    const auto e = feature_embeddings(truncated_svd(from_dense(d), 2, 0));
    std::vector<double> norms{e.col(0).norm(), e.col(1).norm()};
    std::sort(norms.begin(), norms.end());
    CHECK(norms[0] == doctest::Approx(2.0));
    CHECK(norms[1] == doctest::Approx(3.0));
  }
  SUBCASE("rank two matrix keeps column cosines") {
    std::mt19937_64 rng(2);
    const auto x = exact_rank(4, 6, 2, rng);
    const auto e = feature_embeddings(truncated_svd(x, 2, 0));
    const Eigen::MatrixXd d = x.to_dense();
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j)
        CHECK(cosine(e.col(i), e.col(j)) == doctest::Approx(cosine(d.col(i), d.col(j))).epsilon(1e-6));
  }
}

TEST_CASE("fold-in reproduces U rows and is linear") {
  std::mt19937_64 rng(13);
  const auto x = exact_rank(25, 35, 4, rng);
  const auto svd = truncated_svd(x, 4, 1);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto folded = fold_in(x.row(i), svd);
    const Eigen::VectorXd u_row = svd.u.row(static_cast<Eigen::Index>(i)).transpose();
    CHECK((folded - u_row).cwiseAbs().maxCoeff() <= 1e-8);
    const auto doubled = fold_in(x.row(i).scaled(2.0), svd);
    CHECK((doubled - 2.0 * u_row).cwiseAbs().maxCoeff() <= 1e-8);
  }
  CHECK(fold_in(SparseVector(35), svd).norm() == 0.0);
}

TEST_CASE("fold-in rejects singular spaces and wrong lengths") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d(0, 0) = 1;
  const auto x = from_dense(d);
  auto svd = truncated_svd(x, 1, 0);
  CHECK(kind_of([&] { fold_in(SparseVector(4), svd); }) == ErrorKind::DimensionMismatch);
  svd.sigma[0] = 0.0;
  CHECK(kind_of([&] { fold_in(SparseVector(3), svd); }) == ErrorKind::SingularSpace);
}

TEST_CASE("cosine examples and properties") {
  CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
  CHECK(cosine(Eigen::Vector2d(2, 0), Eigen::Vector2d(5, 0)) == doctest::Approx(1.0));
  CHECK(cosine(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 0)) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) == 0.0);
  CHECK(kind_of([] { cosine(Eigen::Vector2d(1, 0), Eigen::Vector3d(1, 0, 0)); }) == ErrorKind::DimensionMismatch);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd p(5), q(5);
    for (int i = 0; i < 5; ++i) {
      p[i] = normal(rng);
      q[i] = normal(rng);
    }
    const double c = cosine(p, q);
    CHECK(std::abs(c) <= 1.0 + 1e-12);
    CHECK(c == doctest::Approx(cosine(q, p)).epsilon(1e-15));
    CHECK(std::abs(cosine(scale(rng) * p, q) - c) <= 1e-12);
    CHECK(cosine(p, p) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flipping a singular vector pair leaves embedding cosines unchanged") {
  std::mt19937_64 rng(21);
  const auto x = random_sparse(30, 40, 0.15, rng);
  auto svd = truncated_svd(x, 6, 0);
  const Eigen::MatrixXd before = feature_embeddings(svd);
  for (Eigen::Index j : {0, 3, 5}) {
    svd.u.col(j) *= -1.0;
    svd.v.col(j) *= -1.0;
  }
  const Eigen::MatrixXd after = feature_embeddings(svd);
  for (Eigen::Index a = 0; a < before.cols(); ++a)
    for (Eigen::Index b = a + 1; b < before.cols(); ++b)
      CHECK(std::abs(cosine(before.col(a), before.col(b)) - cosine(after.col(a), after.col(b))) <= 1e-12);
}
