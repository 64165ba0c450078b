#include <benchmark/benchmark.h>

#include <random>

#include "nre/baseline.hpp"
#include "nre/harness.hpp"
#include "nre/resampling.hpp"
#include "nre/simulator.hpp"

using namespace nre;

namespace {

const Circuit& star_target() {
  static const Circuit c = build_tfim_qaoa(parse_topology("star-5"), 2.0, default_qaoa_parameters());
  return c;
}

void BM_SimulateDensity(benchmark::State& state) {
  const Circuit folded = fold_global(star_target(), static_cast<double>(state.range(0)));
  const NoiseSpec noise{0.01, AmplificationMode::FoldedCircuit, {}};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_density(folded, noise, 1.0));
}
BENCHMARK(BM_SimulateDensity)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SampleCounts(benchmark::State& state) {
  const DensityMatrix rho = simulate_density(star_target(), {0.01, AmplificationMode::FoldedCircuit, {}}, 1.0);
  const auto groups = tfim_measurement_groups(parse_topology("star-5"), 2.0);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_counts(rho, groups[0], 50000, rng));
}
BENCHMARK(BM_SampleCounts)->Unit(benchmark::kMicrosecond);

void BM_EvaluateBaseline(benchmark::State& state) {
  const std::vector<double> target{-9.1, -8.3, -7.6}, ncc{9.0, 8.2, 7.4};
  const auto weights = taylor_weights(3, 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_baseline(target, ncc, 10.0, weights));
}
BENCHMARK(BM_EvaluateBaseline);

void BM_SecondLayer(benchmark::State& state) {
  const std::vector<double> target{-9.1, -8.3, -7.6}, ncc{9.0, 8.2, 7.4};
  BootstrapSet boot = BootstrapSet::constant(target, ncc, 20);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (auto* role : {&boot.target, &boot.ncc})
    for (auto& series : *role)
      for (double& v : series) v += noise(rng);
  boot.compute_std();
  PipelineConfig config;
  config.bootstraps = 20;
  config.resamples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_nre_on_bootstraps(boot, LambdaGrid({1.0, 2.0, 3.0}), 10.0, config));
  state.SetItemsProcessed(state.iterations() * config.bootstraps * config.resamples);
}
BENCHMARK(BM_SecondLayer)->Arg(1000)->Arg(40000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
