#pragma once

#include <span>
#include <string>
#include <vector>

#include "nre/baseline.hpp"

namespace nre {

struct FitResult {
  /// Extrapolated value (intercept at D = 0 or lambda = 0).
  double value = 0.0;
  /// Line fits: {intercept, slope}. Exponential fits: {amplitude, decay} or
  /// {amplitude, decay, offset}.
  std::vector<double> parameters;
  double residual_norm = 0.0;
  std::string weighting;
  /// All abscissae identical; `value` is then the weighted mean.
  bool collinear = false;
};

/// Floor on D when forming regression weights 1/D.
inline constexpr double kDefaultWeightFloor = 1e-6;

/// Weighted least-squares line through (x, y) with the given positive weights.
FitResult weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights);

/// Weighted regression of baseline estimates y on dispersions D with weights
/// 1 / max(D, floor); returns the intercept at D = 0.
FitResult weighted_linear_extrapolation(std::span<const double> dispersion, std::span<const double> y,
                                        double weight_floor = kDefaultWeightFloor);

/// y = a exp(-b lambda) (+ c with `with_offset`), extrapolated to lambda = 0.
/// Same-sign data without offset use a log-linear least-squares fit; other
/// cases run Levenberg-Marquardt from the log-linear guess.
FitResult exponential_fit_zne(const LambdaSeries& series, bool with_offset = false);

/// Richardson extrapolation: series_1 + sum_i V_i series_i with the Taylor
/// weights of the series grid at lambda_1.
double richardson_zne(const LambdaSeries& series);

enum class FitKind { Linear, Exponential };

/// Rescales the target by the ncc decay (P1) and extrapolates P1 to lambda = 0.
FitResult urbanek_estimate(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless,
                           FitKind kind = FitKind::Linear);

}  // namespace nre
