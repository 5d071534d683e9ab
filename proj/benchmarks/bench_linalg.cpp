#include <random>

#include <benchmark/benchmark.h>

#include "eventrec/linalg.hpp"

namespace {

eventrec::SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<eventrec::Triplet> entries;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (unit(rng) < density) entries.push_back({i, j, unit(rng) + 0.1});
    }
  }
  return eventrec::SparseMatrix(rows, cols, entries);
}

void BM_TruncatedSvd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto x = random_sparse(n, n + n / 4, 0.02, 7);
  for (auto _ : state) {
    auto svd = eventrec::truncated_svd(x, k, 0);
    benchmark::DoNotOptimize(svd.sigma.data());
  }
  state.counters["nnz"] = static_cast<double>(x.nnz());
}
BENCHMARK(BM_TruncatedSvd)->Args({400, 16})->Args({800, 32})->Unit(benchmark::kMillisecond);

void BM_FoldIn(benchmark::State& state) {
  const auto x = random_sparse(600, 700, 0.03, 11);
  const auto svd = eventrec::truncated_svd(x, 32, 0);
  const auto row = x.row(3);
  for (auto _ : state) benchmark::DoNotOptimize(eventrec::fold_in(row, svd).data());
}
BENCHMARK(BM_FoldIn);

void BM_Cosine(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  eventrec::LatentVector p(state.range(0)), q(state.range(0));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    p(i) = normal(rng);
    q(i) = normal(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(eventrec::cosine(p, q));
}
BENCHMARK(BM_Cosine)->Arg(64)->Arg(256);

}  // namespace
