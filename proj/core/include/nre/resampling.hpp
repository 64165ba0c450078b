#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nre/baseline.hpp"
#include "nre/circuit.hpp"
#include "nre/rng.hpp"
#include "nre/simulator.hpp"

namespace nre {

/// Multinomial resamples (with replacement) of the observed shots.
std::vector<CountsTable> bootstrap_counts(const CountsTable& counts, int replicates, Rng& rng);

/// R draws from Normal(mean, stddev); stddev = 0 gives R copies of the mean.
std::vector<double> gaussian_resample(double mean, double stddev, int count, Rng& rng);

struct PipelineConfig {
  int bootstraps = 200;
  int resamples = 40000;
  double weight_floor = 1e-6;
  std::uint64_t seed = 0;
  /// Skip the dispersion regression; allows M = 2.
  bool baseline_only = false;
  /// Keep up to this many (D, baseline) pairs per bootstrap for diagnostics.
  std::size_t pooled_per_bootstrap = 0;
  /// Abort when a bootstrap discards more than this fraction of resamples.
  double max_discard_fraction = 0.5;

  void validate() const;
};

/// Counts of one circuit at every (lambda, group) coordinate: counts[i][g].
using CountsGrid = std::vector<std::vector<CountsTable>>;

struct PipelineInput {
  LambdaGrid grid;
  std::vector<MeasurementGroup> groups;
  CountsGrid target;
  CountsGrid ncc;
  double ncc_noiseless = 0.0;

  void validate() const;
};

/// Bootstrapped scalar observable (sum over groups) per role and lambda.
/// samples[i][s] is bootstrap s at lambda index i.
struct BootstrapSet {
  int replicates = 0;
  std::vector<std::vector<double>> target;
  std::vector<std::vector<double>> ncc;
  std::vector<double> target_std;
  std::vector<double> ncc_std;
  /// Observables computed from the original counts.
  std::vector<double> target_observed;
  std::vector<double> ncc_observed;

  /// B identical replicates of exact values; all standard deviations zero.
  static BootstrapSet constant(std::span<const double> target, std::span<const double> ncc, int replicates);
  void compute_std();
};

/// Observable from counts: sum over groups of expectation_from_counts.
double aggregate_expectation(std::span<const CountsTable> per_group, std::span<const MeasurementGroup> groups);

/// Bootstrapped observable of one circuit per lambda, result[i][s]. Streams
/// are derived from (seed, stream, lambda index, group).
std::vector<std::vector<double>> bootstrap_observable(const CountsGrid& counts, std::span<const MeasurementGroup> groups,
                                                      int bootstraps, std::uint64_t seed, std::uint64_t stream);

/// Bootstraps every counts table `bootstraps` times with streams derived from
/// (seed, role, lambda index, group) and aggregates per lambda.
BootstrapSet bootstrap_expectations(const PipelineInput& input, int bootstraps, std::uint64_t seed);

struct DispersionSample {
  double dispersion;
  double estimate;
};

struct EstimateDistribution {
  std::vector<double> samples;
  double mean = 0.0;
  double stddev = 0.0;

  static EstimateDistribution from_samples(std::vector<double> samples);
};

struct PipelineResult {
  EstimateDistribution final_estimates;
  /// Per-bootstrap median of the resampled baseline estimates.
  EstimateDistribution baseline_estimates;
  std::uint64_t baseline_evaluations = 0;
  std::uint64_t discarded = 0;
  double discard_rate = 0.0;
  std::vector<DispersionSample> pooled;
  std::vector<double> target_observed;
  std::vector<double> ncc_observed;
};

/// Second stage of the extended workflow: Gaussian resampling around each
/// bootstrap, first-layer baseline per resample, and the weighted D -> 0
/// regression per bootstrap.
PipelineResult run_nre_on_bootstraps(const BootstrapSet& boot, const LambdaGrid& grid, double ncc_noiseless,
                                     const PipelineConfig& config);

/// Full two-layer pipeline from raw counts.
PipelineResult run_nre_pipeline(const PipelineInput& input, const PipelineConfig& config);

}  // namespace nre
