// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>

#include "curlra/kernels.hpp"
#include "curlra/random.hpp"

using namespace curlra;

namespace {

template <Scalar T>
Matrix<T> filled(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix<T> A(m, n);
  for (std::size_t t = 0; t < A.size(); ++t) {
    if constexpr (std::is_same_v<T, cplx>)
      A.data()[t] = {rng.normal(), rng.normal()};
    else
      A.data()[t] = rng.normal();
  }
  return A;
}

void BM_GemmReference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat A = filled<double>(n, n, 1), B = filled<double>(n, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gemm_reference(A, B));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(2 * n * n * n));
}

void BM_GemmParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat A = filled<double>(n, n, 1), B = filled<double>(n, n, 2);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::gemm_parallel(A, B));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(2 * n * n * n));
}

void BM_ButterflyReference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat X0 = filled<double>(n, 64, 3);
  for (auto _ : st) {
    Mat X = X0;
    benchmark::DoNotOptimize(kernels::butterfly_columns_reference(X, 1));
  }
}

void BM_ButterflyParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat X0 = filled<double>(n, 64, 3);
  for (auto _ : st) {
    Mat X = X0;
    kernels::butterfly_columns_parallel(X, 1);
    benchmark::DoNotOptimize(X.data());
  }
}

std::size_t log2_of(std::size_t n) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

void BM_DifReference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const CMat X0 = filled<cplx>(n, 64, 4);
  for (auto _ : st) {
    CMat X = X0;
    benchmark::DoNotOptimize(kernels::dif_columns_reference(X, log2_of(n)));
  }
}

void BM_DifParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const CMat X0 = filled<cplx>(n, 64, 4);
  for (auto _ : st) {
    CMat X = X0;
    kernels::dif_columns_parallel(X, log2_of(n));
    benchmark::DoNotOptimize(X.data());
  }
}

void BM_DiffFrobeniusReference(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat A = filled<double>(n, n, 5), B = filled<double>(n, n, 6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::diff_frobenius2_reference(A, B));
}

void BM_DiffFrobeniusParallel(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Mat A = filled<double>(n, n, 5), B = filled<double>(n, n, 6);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::diff_frobenius2_parallel(A, B));
}

}  // namespace

BENCHMARK(BM_GemmReference)->Arg(64)->Arg(256);
BENCHMARK(BM_GemmParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_ButterflyReference)->Arg(256)->Arg(1024);
BENCHMARK(BM_ButterflyParallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_DifReference)->Arg(256)->Arg(1024);
BENCHMARK(BM_DifParallel)->Arg(256)->Arg(1024);
BENCHMARK(BM_DiffFrobeniusReference)->Arg(256)->Arg(1024);
BENCHMARK(BM_DiffFrobeniusParallel)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
