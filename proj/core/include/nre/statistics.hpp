#pragma once

#include <span>

namespace nre {

double mean(std::span<const double> values);
/// Unbiased (n - 1) sample variance; zero for fewer than two values.
double sample_variance(std::span<const double> values);
double sample_std(std::span<const double> values);
double median(std::span<const double> values);

struct Correlation {
  double rho = 0.0;
  /// One-sided p-value for rho > 0 (t approximation with n - 2 dof).
  double p_value = 1.0;
};

/// Spearman rank correlation with average ranks for ties.
Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace nre
