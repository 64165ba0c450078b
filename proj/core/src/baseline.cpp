#include "nre/baseline.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nre/errors.hpp"

namespace nre {

namespace {

constexpr std::size_t kMaxPoints = 32;

double mean_abs(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s / static_cast<double>(values.size());
}

bool negligible_dispersion(double dispersion, std::span<const double> values) {
  return dispersion <= kDispersionTolerance * (1.0 + mean_abs(values));
}

}  // namespace

double mad(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("MAD of an empty set");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double dev = 0.0;
  for (double v : values) dev += std::abs(v - mean);
  return dev / static_cast<double>(values.size());
}

void LambdaSeries::validate() const {
  if (values.size() != grid.size()) throw std::invalid_argument("series length does not match its lambda grid");
}

std::vector<double> AuxSeries::values(double n) const {
  std::vector<double> a(p1.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = at(n, i);
  return a;
}

AuxSeries compute_aux_series(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless) {
  target.validate();
  ncc.validate();
  if (!(target.grid == ncc.grid)) throw std::invalid_argument("target and ncc series use different grids");
  if (ncc_noiseless == 0.0 || !std::isfinite(ncc_noiseless)) {
    throw std::invalid_argument("noiseless ncc expectation must be finite and nonzero");
  }
  AuxSeries aux;
  aux.ncc_noiseless = ncc_noiseless;
  aux.p1.resize(target.values.size());
  aux.p2.resize(target.values.size());
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    const double ratio = ncc_noiseless / ncc.values[i];
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
      throw SignViolationError("noisy ncc value at lambda index " + std::to_string(i) +
                               " does not share the sign of the noiseless ncc value; log-ratio undefined");
    }
    aux.p1[i] = target.values[i] * ratio;
    aux.p2[i] = std::log(ratio);
  }
  return aux;
}

ControlParameter optimal_control(const AuxSeries& aux, std::span<const double> weights) {
  if (weights.size() != aux.p1.size()) throw std::invalid_argument("Taylor weights do not match series length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    num += weights[i] * aux.p1[i];
    den += weights[i] * aux.p2[i];
  }
  if (std::abs(den) < kControlDenominatorTolerance * (std::abs(num) + 1.0)) return {0.0, true};
  return {-num / den, false};
}

BaselineResult baseline_estimate(const AuxSeries& aux, const ControlParameter& control,
                                 std::span<const double> target_values) {
  if (target_values.size() != aux.p1.size()) throw std::invalid_argument("target series length mismatch");
  BaselineResult r;
  r.n_op = control.n_op;
  r.degenerate = control.degenerate;
  r.estimate = aux.at(control.n_op, 0);
  const auto a = aux.values(control.n_op);
  const double num = mad(a);
  if (negligible_dispersion(num, a)) {
    r.dispersion = 0.0;
    return r;
  }
  const double den = mad(target_values);
  if (negligible_dispersion(den, target_values)) {
    throw DegenerateDispersionError("target series has zero dispersion; normalized dispersion undefined");
  }
  r.dispersion = num / den;
  return r;
}

BaselineOutcome evaluate_baseline(std::span<const double> target, std::span<const double> ncc, double ncc_noiseless,
                                  std::span<const double> weights) {
  const std::size_t m = target.size();
  if (m > kMaxPoints || ncc.size() != m || weights.size() != m) {
    throw std::invalid_argument("evaluate_baseline: inconsistent series lengths");
  }
  std::array<double, kMaxPoints> p1{};
  std::array<double, kMaxPoints> p2{};
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double ratio = ncc_noiseless / ncc[i];
    if (!(ratio > 0.0) || !std::isfinite(ratio)) return {BaselineStatus::SignViolation, {}};
    p1[i] = target[i] * ratio;
    p2[i] = std::log(ratio);
    num += weights[i] * p1[i];
    den += weights[i] * p2[i];
  }
  BaselineOutcome out;
  auto& r = out.result;
  if (std::abs(den) < kControlDenominatorTolerance * (std::abs(num) + 1.0)) {
    r.degenerate = true;
    r.n_op = 0.0;
  } else {
    r.n_op = -num / den;
  }
  std::array<double, kMaxPoints> a{};
  for (std::size_t i = 0; i < m; ++i) a[i] = p1[i] + r.n_op * p2[i];
  r.estimate = a[0];
  const std::span<const double> aux_values(a.data(), m);
  const double mad_aux = mad(aux_values);
  if (negligible_dispersion(mad_aux, aux_values)) {
    r.dispersion = 0.0;
    return out;
  }
  const double mad_target = mad(target);
  if (negligible_dispersion(mad_target, target)) {
    out.status = BaselineStatus::DegenerateDispersion;
    return out;
  }
  r.dispersion = mad_aux / mad_target;
  return out;
}

BaselineResult run_baseline(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless) {
  const AuxSeries aux = compute_aux_series(target, ncc, ncc_noiseless);
  const auto weights = taylor_weights(fd_coefficients(target.grid), target.grid.first());
  return baseline_estimate(aux, optimal_control(aux, weights), target.values);
}

ResidualBias residual_bias_diagnostic(double truth, const BaselineResult& baseline, const AuxSeries& aux,
                                      const FdCoefficients& intended, const FdCoefficients& implemented,
                                      double lambda1) {
  if (intended.points() != implemented.points() || static_cast<std::size_t>(intended.points()) != aux.p1.size()) {
    throw std::invalid_argument("coefficient matrices do not match the series length");
  }
  ResidualBias out;
  out.bias = truth - baseline.estimate;
  double factor = 1.0;
  for (int j = 1; j <= intended.orders(); ++j) {
    factor *= -lambda1 / j;
    double inner = 0.0;
    for (int i = 0; i < intended.points(); ++i) {
      inner += (implemented.weights(j - 1, i) - intended.weights(j - 1, i)) *
               aux.at(baseline.n_op, static_cast<std::size_t>(i));
    }
    out.amplification += factor * inner;
  }
  return out;
}

}  // namespace nre
