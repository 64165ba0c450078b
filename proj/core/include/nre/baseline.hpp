#pragma once

#include <span>
#include <vector>

#include "nre/finite_difference.hpp"

namespace nre {

/// Mean absolute deviation about the mean.
double mad(std::span<const double> values);

enum class CircuitRole { Target, NoiseCanceling };

struct LambdaSeries {
  LambdaGrid grid;
  std::vector<double> values;
  CircuitRole role = CircuitRole::Target;

  /// Throws std::invalid_argument if the lengths disagree.
  void validate() const;
};

/// P1(lambda_i) = target_i * ncc0 / ncc_i and P2(lambda_i) = log(ncc0 / ncc_i).
struct AuxSeries {
  std::vector<double> p1;
  std::vector<double> p2;
  double ncc_noiseless = 0.0;

  /// A(n, lambda_i) = p1_i + n * p2_i.
  double at(double n, std::size_t i) const { return p1[i] + n * p2[i]; }
  std::vector<double> values(double n) const;
};

/// Throws SignViolationError if any ncc value is zero or differs in sign from
/// the noiseless ncc value.
AuxSeries compute_aux_series(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless);

struct ControlParameter {
  double n_op = 0.0;
  bool degenerate = false;
};

/// Relative threshold on |sum_i V_i P2_i| below which n_op is forced to zero.
inline constexpr double kControlDenominatorTolerance = 1e-12;

/// n_op = -sum V_i P1_i / sum V_i P2_i. A vanishing denominator yields
/// n_op = 0 with the degenerate flag set.
ControlParameter optimal_control(const AuxSeries& aux, std::span<const double> weights);

struct BaselineResult {
  double estimate = 0.0;
  double n_op = 0.0;
  double dispersion = 0.0;
  bool degenerate = false;
};

/// MAD below this (relative to 1 + mean |x|) counts as zero dispersion.
inline constexpr double kDispersionTolerance = 1e-13;

/// Baseline A(n_op, lambda_1) and normalized dispersion
/// MAD[A(n_op, lambda_i)] / MAD[target_i]. A constant auxiliary series has
/// D = 0; a constant target with a varying auxiliary series throws
/// DegenerateDispersionError.
BaselineResult baseline_estimate(const AuxSeries& aux, const ControlParameter& control,
                                 std::span<const double> target_values);

enum class BaselineStatus { Ok, SignViolation, DegenerateDispersion };

struct BaselineOutcome {
  BaselineStatus status = BaselineStatus::Ok;
  BaselineResult result;
};

/// Non-throwing, allocation-free evaluation of the whole first layer from raw
/// target and ncc expectations. Used for the resampling hot loop.
BaselineOutcome evaluate_baseline(std::span<const double> target, std::span<const double> ncc,
                                  double ncc_noiseless, std::span<const double> weights);

/// Convenience: full first layer on two series, throwing on failure.
BaselineResult run_baseline(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless);

struct ResidualBias {
  /// truth - baseline estimate
  double bias = 0.0;
  /// sum_j (-lambda_1)^j / j! sum_i (a'_ji(t) - a_ji(h)) A(n_op, lambda_i)
  double amplification = 0.0;
};

ResidualBias residual_bias_diagnostic(double truth, const BaselineResult& baseline, const AuxSeries& aux,
                                      const FdCoefficients& intended, const FdCoefficients& implemented,
                                      double lambda1);

}  // namespace nre
