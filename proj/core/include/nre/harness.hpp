#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nre/circuit.hpp"
#include "nre/estimators.hpp"
#include "nre/resampling.hpp"
#include "nre/simulator.hpp"

namespace nre {

enum class Method { Nre, NreBaseline, Zne, Richardson, Urbanek };

std::string to_string(Method method);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

/// QAOA angles for star-5, g = 2, p = 4: optimize_qaoa(seed 1, 12 restarts).
/// The ideal energy is within 1e-5 of the exact ground energy.
QaoaParameters default_qaoa_parameters();

struct ExperimentConfig {
  std::string topology = "star-5";
  double g = 2.0;
  int layers = 4;
  QaoaParameters qaoa = default_qaoa_parameters();
  std::vector<double> lambdas{1.0, 2.0, 3.0};
  std::vector<double> f_values{0.001, 0.003, 0.01, 0.03, 0.05, 0.1};
  std::uint64_t total_shots = 600000;
  int bootstraps = 200;
  int resamples = 40000;
  double weight_floor = kDefaultWeightFloor;
  std::vector<Method> methods = all_methods();
  AmplificationMode mode = AmplificationMode::FoldedCircuit;
  /// Implemented spacings for perturbed mode (M - 1 entries).
  std::vector<double> spacing;
  std::uint64_t seed = 1;
  bool zne_offset = false;
  FitKind urbanek_fit = FitKind::Linear;
  /// Pooled (D, baseline) pairs kept per bootstrap for correlation diagnostics.
  std::size_t pooled_per_bootstrap = 0;
  int max_qubits = kDefaultMaxQubits;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  LambdaGrid grid() const { return LambdaGrid(lambdas); }
  /// Scale factors actually realised by the noise model.
  std::vector<double> implemented_lambdas() const;
};

/// Parses JSON with field names matching ExperimentConfig; missing fields keep
/// their defaults. The NRE_SEED environment variable overrides `seed`.
ExperimentConfig load_config(std::istream& in);
std::string config_to_json(const ExperimentConfig& config);

struct ShotAllocation {
  /// Shots per (circuit, lambda, group) coordinate; index [role][i][g].
  std::vector<std::vector<std::vector<std::uint64_t>>> shots;
  std::uint64_t total() const;
};

/// Equal split of the budget over 2 * M * G coordinates; the remainder goes one
/// shot at a time to the first coordinates so the total is exact.
ShotAllocation allocate_shots(std::uint64_t total, std::size_t lambdas, std::size_t groups);

struct MethodResult {
  double estimate = 0.0;
  double stddev = 0.0;
  double relative_bias = 0.0;
  bool ok = true;
  std::string error;
};

struct LambdaPoint {
  double lambda = 0.0;
  double implemented_lambda = 0.0;
  double target_exact = 0.0;
  double ncc_exact = 0.0;
  double target_observed = 0.0;
  double ncc_observed = 0.0;
  double target_ratio = 0.0;
  double ncc_ratio = 0.0;
};

struct CompareResult {
  double f = 0.0;
  std::uint64_t seed = 0;
  double truth = 0.0;
  double ncc_noiseless = 0.0;
  double ground_energy = 0.0;
  GateCounts target_counts;
  std::vector<LambdaPoint> points;
  std::map<Method, MethodResult> methods;

  // NRE pipeline diagnostics.
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  double discard_rate = 0.0;
  std::vector<DispersionSample> pooled;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<CompareResult> runs;
};

/// |estimate - truth| / |truth|; throws std::invalid_argument for truth = 0.
double relative_bias(double estimate, double truth);

/// Everything for one noise rate: circuits, simulation, counts, and every
/// requested estimator on the same counts.
CompareResult run_compare_single(const ExperimentConfig& config, double f, std::uint64_t seed);

/// run_compare_single for every f in the config with the config seed.
RunReport run_compare(const ExperimentConfig& config);

struct OverheadRow {
  double f = 0.0;
  Method method = Method::Nre;
  double variance = 0.0;
  double raw_variance = 0.0;
  double c_em = 0.0;
  bool valid = true;
};

struct OverheadFit {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t points = 0;
};

struct OverheadTable {
  /// Noisy operations per circuit execution (CZ count of the unfolded target).
  double noisy_operations = 0.0;
  std::vector<OverheadRow> rows;
  std::map<Method, OverheadFit> fits;
  /// All K runs per f, in f-major order, for downstream analysis.
  std::vector<CompareResult> runs;
};

/// Least-squares fit of log C = log alpha + beta * N * f over valid points.
OverheadFit fit_overhead(const std::vector<double>& nf, const std::vector<double>& c_em);

/// K independent seeded end-to-end runs per f. Var[EM] is the sample variance
/// of each method's estimate over the runs; the raw variance uses the whole
/// shot budget on the target at lambda_1.
OverheadTable sweep_overhead(const ExperimentConfig& config, int repetitions);

std::string report_to_json(const RunReport& report);
void write_lambda_csv(std::ostream& out, const RunReport& report);
void write_overhead_csv(std::ostream& out, const OverheadTable& table);

/// Pipeline report (JSON) for externally produced counts.
std::string pipeline_report_json(const PipelineResult& result, const LambdaGrid& grid, const PipelineConfig& config);

/// Noiseless Nelder-Mead minimisation of the QAOA energy from `restarts`
/// seeded starts. The energy is invariant under (gamma, beta) -> (-gamma, -beta);
/// among optima within `tolerance` of the best energy, and both sign twins of
/// each, the one with the smallest clifford_distance is returned.
QaoaParameters optimize_qaoa(const Topology& topology, double g, int layers, std::uint64_t seed, int restarts = 1,
                             double tolerance = 1e-4);

}  // namespace nre
