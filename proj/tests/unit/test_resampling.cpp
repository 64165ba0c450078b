#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nre/errors.hpp"
#include "nre/resampling.hpp"
#include "nre/statistics.hpp"

using namespace nre;

namespace {

CountsTable single_qubit_counts(std::uint64_t zeros, std::uint64_t ones) {
  CountsTable t;
  t.qubits = 1;
  t.shots = zeros + ones;
  if (zeros) t.counts[0] = zeros;
  if (ones) t.counts[1] = ones;
  return t;
}

MeasurementGroup z_group() { return pauli_string_group("Z"); }

// Synthetic single-qubit pipeline input whose <Z> decays with lambda.
PipelineInput synthetic_input(const std::vector<double>& lambdas, double t_rate, double n_rate, std::uint64_t shots,
                              std::uint64_t seed) {
  PipelineInput in;
  in.grid = LambdaGrid(lambdas);
  in.groups = {z_group()};
  in.ncc_noiseless = 0.9;
  std::mt19937_64 rng(seed);
  for (double l : lambdas) {
    const double zt = 0.8 * std::exp(-t_rate * l);
    const double zn = 0.9 * std::exp(-n_rate * l);
    std::binomial_distribution<std::uint64_t> bt(shots, (1 + zt) / 2), bn(shots, (1 + zn) / 2);
    const auto kt = bt(rng), kn = bn(rng);
    in.target.push_back({single_qubit_counts(kt, shots - kt)});
    in.ncc.push_back({single_qubit_counts(kn, shots - kn)});
  }
  return in;
}

}  // namespace

TEST(Bootstrap, ConcentratedCountsAreReproduced) {
  CountsTable t;
  t.qubits = 3;
  t.shots = 1000;
  t.counts[0b101] = 1000;
  Rng rng(1);
  for (const auto& rep : bootstrap_counts(t, 50, rng)) EXPECT_EQ(rep.counts, t.counts);
}

TEST(Bootstrap, ReplicatesConserveShots) {
  CountsTable t;
  t.qubits = 3;
  t.shots = 0;
  for (std::uint64_t i = 0; i < 8; ++i) {
    t.counts[i] = 10 * (i + 1);
    t.shots += 10 * (i + 1);
  }
  Rng rng(2);
  for (const auto& rep : bootstrap_counts(t, 200, rng)) EXPECT_EQ(rep.total(), t.shots);
}

TEST(Bootstrap, SpreadMatchesBinomialFormula) {
  const std::uint64_t shots = 10000;
  const CountsTable t = single_qubit_counts(7000, 3000);
  const double z = 0.4;
  Rng rng(3);
  std::vector<double> values;
  for (const auto& rep : bootstrap_counts(t, 2000, rng)) values.push_back(expectation_from_counts(rep, z_group()));
  const double expected = std::sqrt((1 - z * z) / static_cast<double>(shots));
  EXPECT_NEAR(sample_std(values), expected, 0.15 * expected);
  EXPECT_NEAR(mean(values), z, 4 * expected / std::sqrt(2000.0));
}

TEST(GaussianResample, ZeroSpread) {
  Rng rng(4);
  for (double v : gaussian_resample(1.25, 0.0, 100, rng)) EXPECT_EQ(v, 1.25);
}

TEST(GaussianResample, Moments) {
  Rng rng(5);
  const int r = 10000;
  const auto x = gaussian_resample(-2.0, 0.3, r, rng);
  EXPECT_NEAR(mean(x), -2.0, 3 * 0.3 / std::sqrt(r));
  // Standard error of the sample std is about sigma / sqrt(2 (R - 1)).
  EXPECT_NEAR(sample_std(x), 0.3, 3 * 0.3 / std::sqrt(2.0 * (r - 1)));
}

TEST(GaussianResample, SeedDeterminism) {
  Rng a(6), b(6);
  EXPECT_EQ(gaussian_resample(0.1, 0.2, 500, a), gaussian_resample(0.1, 0.2, 500, b));
  Rng bad(7);
  EXPECT_THROW(gaussian_resample(0.0, -1.0, 3, bad), std::invalid_argument);
}

TEST(PipelineConfig, Validation) {
  PipelineConfig c;
  c.bootstraps = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.bootstraps = 2;
  c.resamples = 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Pipeline, ExactNoiselessInputReturnsTruth) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  const std::vector<double> target{-10.25, -10.25, -10.25}, ncc{6.0, 6.0, 6.0};
  const BootstrapSet boot = BootstrapSet::constant(target, ncc, 20);
  PipelineConfig config;
  config.bootstraps = 20;
  config.resamples = 100;
  const PipelineResult r = run_nre_on_bootstraps(boot, grid, 6.0, config);
  for (double v : r.final_estimates.samples) EXPECT_NEAR(v, -10.25, 1e-9);
  EXPECT_NEAR(r.final_estimates.mean, -10.25, 1e-9);
  EXPECT_EQ(r.final_estimates.stddev, 0.0);
  EXPECT_EQ(r.discarded, 0u);
}

TEST(Pipeline, CountsEveryBaselineEvaluation) {
  const PipelineInput in = synthetic_input({1.0, 2.0, 3.0}, 0.2, 0.25, 20000, 8);
  PipelineConfig config;
  config.bootstraps = 16;
  config.resamples = 500;
  config.pooled_per_bootstrap = 10;
  const PipelineResult r = run_nre_pipeline(in, config);
  EXPECT_EQ(r.baseline_evaluations, 16u * 500u);
  EXPECT_EQ(r.final_estimates.samples.size(), 16u);
  EXPECT_EQ(r.baseline_estimates.samples.size(), 16u);
  EXPECT_EQ(r.pooled.size(), 160u);
  ASSERT_EQ(r.target_observed.size(), 3u);
  EXPECT_NEAR(r.final_estimates.mean, 0.8, 0.1);
}

TEST(Pipeline, DeterministicForFixedSeed) {
  const PipelineInput in = synthetic_input({1.0, 2.0, 3.0}, 0.2, 0.3, 5000, 9);
  PipelineConfig config;
  config.bootstraps = 10;
  config.resamples = 300;
  config.seed = 77;
  const PipelineResult a = run_nre_pipeline(in, config);
  const PipelineResult b = run_nre_pipeline(in, config);
  EXPECT_EQ(a.final_estimates.samples, b.final_estimates.samples);
  EXPECT_EQ(a.baseline_estimates.samples, b.baseline_estimates.samples);
  config.seed = 78;
  EXPECT_NE(run_nre_pipeline(in, config).final_estimates.samples, a.final_estimates.samples);
}

TEST(Pipeline, TwoPointsNeedBaselineOnly) {
  const PipelineInput in = synthetic_input({1.0, 2.0}, 0.2, 0.3, 5000, 10);
  PipelineConfig config;
  config.bootstraps = 5;
  config.resamples = 50;
  EXPECT_THROW(run_nre_pipeline(in, config), std::invalid_argument);
  config.baseline_only = true;
  const PipelineResult r = run_nre_pipeline(in, config);
  EXPECT_EQ(r.final_estimates.samples, r.baseline_estimates.samples);
}

TEST(Pipeline, AbortsWhenNccCrossesZero) {
  // ncc expectation near zero: most Gaussian resamples flip sign.
  PipelineInput in = synthetic_input({1.0, 2.0, 3.0}, 0.2, 0.3, 2000, 11);
  in.ncc[2] = {single_qubit_counts(1001, 999)};
  PipelineConfig config;
  config.bootstraps = 4;
  config.resamples = 200;
  EXPECT_THROW(run_nre_pipeline(in, config), SignViolationError);
}

TEST(Pipeline, RejectsMismatchedInput) {
  PipelineInput in = synthetic_input({1.0, 2.0, 3.0}, 0.2, 0.3, 2000, 12);
  in.ncc.pop_back();
  EXPECT_THROW(run_nre_pipeline(in, {}), std::invalid_argument);
}

TEST(BootstrapObservable, SeedAndStreamDeterminism) {
  const PipelineInput in = synthetic_input({1.0, 2.0, 3.0}, 0.2, 0.3, 4000, 13);
  const auto a = bootstrap_observable(in.target, in.groups, 30, 5, 0);
  const auto b = bootstrap_observable(in.target, in.groups, 30, 5, 0);
  const auto c = bootstrap_observable(in.target, in.groups, 30, 5, 1);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0].size(), 30u);
}
