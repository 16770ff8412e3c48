#include <benchmark/benchmark.h>

#include "ssgm/ssgm.hpp"

using namespace ssgm;

static void BM_RiemannLiouvilleEval(benchmark::State& state) {
  double s = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_rl(0.25, s, 1.7));
    s = s < 1.0 ? s + 1e-3 : 0.3;
  }
}
BENCHMARK(BM_RiemannLiouvilleEval);

static void BM_PsdCheck(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto gram = build_gram(CovKernel(ProcessSpec::fbm(0.3)), TimeGrid::geometric(0.01, 10, n));
  for (auto _ : state) benchmark::DoNotOptimize(psd_check(gram).psd);
}
BENCHMARK(BM_PsdCheck)->Arg(32)->Arg(128)->Arg(512);

static void BM_TimeChangeSampler(benchmark::State& state) {
  const auto grid = TimeGrid::geometric(0.1, 2, 16);
  for (auto _ : state) benchmark::DoNotOptimize(sample_timechange(0.7, -1.5, grid, state.range(0), 1).values.data());
}
BENCHMARK(BM_TimeChangeSampler)->Arg(1000)->Arg(50000);

static void BM_CholeskySampler(benchmark::State& state) {
  const auto grid = TimeGrid::dyadic(static_cast<std::size_t>(state.range(0)));
  const CovKernel k(ProcessSpec::fbm(0.75));
  for (auto _ : state) benchmark::DoNotOptimize(sample_cholesky(k, grid, 64, 1).values.data());
}
BENCHMARK(BM_CholeskySampler)->Arg(256)->Arg(1024);

static void BM_VolterraZg(benchmark::State& state) {
  const auto grid = TimeGrid::integers(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sample_volterra_zg(0.25, 1.0, GFunction::constant(1.0), grid, 64, 4, 1).values.data());
  }
}
BENCHMARK(BM_VolterraZg)->Arg(100)->Arg(500);

static void BM_DoobResidual(benchmark::State& state) {
  const CovKernel k(ProcessSpec::sub_fbm(0.25));
  for (auto _ : state) benchmark::DoNotOptimize(doob_residual(k, standard_grid()).max);
}
BENCHMARK(BM_DoobResidual);
BENCHMARK_MAIN();
