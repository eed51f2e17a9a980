// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to compare
// thread counts.

#include <benchmark/benchmark.h>

#include "dcrec/kernels.hpp"
#include "dcrec/rng.hpp"

namespace {

using dcrec::Matrix;

Matrix random(std::size_t r, std::size_t c, std::uint64_t seed) {
  dcrec::Lcg64 rng(seed);
  Matrix m(r, c);
  for (auto& x : m.flat()) x = rng.normal();
  return m;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random(n, n, 1), b = random(n, n, 2);
  for (auto _ : state) {
    Matrix c = Parallel ? dcrec::kernels::matmul(a, b) : dcrec::kernels::serial::matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

// One sequence through a width-5 same-padded block: L x C input, F filters.
template <bool Parallel>
void BM_Conv1d(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const std::size_t channels = 300, filters = 128, width = 5;
  const Matrix input = random(len, channels, 3);
  const Matrix kernels = random(filters, width * channels, 4);
  const std::vector<double> bias(filters, 0.1);
  for (auto _ : state) {
    Matrix out = Parallel ? dcrec::kernels::conv1d(input, kernels, bias, width, 2, len)
                          : dcrec::kernels::serial::conv1d(input, kernels, bias, width, 2, len);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_PairwiseDist(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix pts = random(n, 512, 5);
  for (auto _ : state) {
    Matrix d = Parallel ? dcrec::kernels::pairwise_sq_dist(pts)
                        : dcrec::kernels::serial::pairwise_sq_dist(pts);
    benchmark::DoNotOptimize(d.data());
  }
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Matmul<true>)->Name("matmul/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_Conv1d<false>)->Name("conv1d/serial")->Arg(100);
BENCHMARK(BM_Conv1d<true>)->Name("conv1d/openmp")->Arg(100);
BENCHMARK(BM_PairwiseDist<false>)->Name("pairwise_sq_dist/serial")->Arg(200);
BENCHMARK(BM_PairwiseDist<true>)->Name("pairwise_sq_dist/openmp")->Arg(200);

BENCHMARK_MAIN();
