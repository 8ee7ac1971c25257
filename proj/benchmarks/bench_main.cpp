#include <benchmark/benchmark.h>

#include <vector>

#include "meanfield/dynamics.hpp"
#include "meanfield/empirical_measure.hpp"
#include "meanfield/ensemble.hpp"
#include "meanfield/kernels.hpp"

namespace {

using namespace meanfield;

ModelParams bench_params() {
  ModelParams p;
  p.epsilon = 0.3;
  p.delta = 0.5;
  p.r_cut = 4.0;
  return p;
}

void BM_ForcePass(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const ModelParams p = bench_params();
  const PhaseEnsemble source = sample_initial(InitialLaw::centered(2, 1.0, 1.0), m, 7);
  const EmpiricalMeasure measure(source, p);
  const Vec x = source.position(0);
  for (auto _ : state) benchmark::DoNotOptimize(measure.force(x.span()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_ForcePass)->Arg(1 << 10)->Arg(1 << 14);

void BM_AlignmentPass(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const ModelParams p = bench_params();
  const PhaseEnsemble source = sample_initial(InitialLaw::centered(2, 1.0, 1.0), m, 7);
  const EmpiricalMeasure measure(source, p);
  const Vec x = source.position(0);
  for (auto _ : state) benchmark::DoNotOptimize(measure.alignment(x.span()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_AlignmentPass)->Arg(1 << 10)->Arg(1 << 14);

void BM_Accelerations(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams p = bench_params();
  const PhaseEnsemble ensemble = sample_initial(InitialLaw::centered(2, 1.0, 1.0), n, 11);
  const EmpiricalMeasure measure(ensemble, p);
  std::vector<double> out(2 * n);
  for (auto _ : state) {
    accelerations(ensemble, measure, p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Accelerations)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_Rk4Step(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ModelParams p = bench_params();
  const PhaseEnsemble ensemble = sample_initial(InitialLaw::centered(2, 1.0, 1.0), n, 13);
  const double dt = dt_max(p);
  for (auto _ : state) benchmark::DoNotOptimize(step(ensemble, SelfInteracting{}, p, dt));
}
BENCHMARK(BM_Rk4Step)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
