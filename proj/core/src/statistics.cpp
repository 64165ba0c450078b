#include "nre/statistics.hpp"

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_statistics_double.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nre {

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty set");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

double sample_std(std::span<const double> values) { return std::sqrt(sample_variance(values)); }

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("spearman needs >= 3 paired samples");
  const std::size_t n = x.size();
  std::vector<double> work(2 * n);
  Correlation c;
  c.rho = gsl_stats_spearman(x.data(), 1, y.data(), 1, n, work.data());
  if (!std::isfinite(c.rho)) {
    c.rho = 0.0;
    return c;
  }
  const double dof = static_cast<double>(n - 2);
  if (std::abs(c.rho) >= 1.0) {
    c.p_value = c.rho > 0 ? 0.0 : 1.0;
    return c;
  }
  const double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
  c.p_value = gsl_cdf_tdist_Q(t, dof);
  return c;
}

}  // namespace nre
