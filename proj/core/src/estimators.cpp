#include "nre/estimators.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "nre/errors.hpp"

namespace nre {

FitResult weighted_line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights) {
  const std::size_t k = x.size();
  if (k < 2 || y.size() != k || weights.size() != k) throw std::invalid_argument("line fit needs >= 2 matched points");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(weights[i] > 0.0)) throw std::invalid_argument("regression weights must be positive");
    sw += weights[i];
    sx += weights[i] * x[i];
    sy += weights[i] * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = x[i] - xbar;
    sxx += weights[i] * dx * dx;
    sxy += weights[i] * dx * (y[i] - ybar);
  }

  FitResult fit;
  double slope = 0.0;
  double xscale = 0.0;
  for (double v : x) xscale = std::max(xscale, std::abs(v));
  if (sxx <= 1e-24 * sw * (1.0 + xscale * xscale)) {
    fit.collinear = true;
  } else {
    slope = sxy / sxx;
  }
  const double intercept = fit.collinear ? ybar : ybar - slope * xbar;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    rss += weights[i] * r * r;
  }
  fit.value = intercept;
  fit.parameters = {intercept, slope};
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

FitResult weighted_linear_extrapolation(std::span<const double> dispersion, std::span<const double> y,
                                        double weight_floor) {
  if (dispersion.size() != y.size()) throw std::invalid_argument("dispersion and estimate counts differ");
  if (!(weight_floor > 0.0)) throw std::invalid_argument("weight floor must be positive");
  std::vector<double> w(dispersion.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (dispersion[i] < 0.0) throw std::invalid_argument("normalized dispersion must be >= 0");
    w[i] = 1.0 / std::max(dispersion[i], weight_floor);
  }
  FitResult fit = weighted_line_fit(dispersion, y, w);
  fit.weighting = "1/max(D," + std::to_string(weight_floor) + ")";
  return fit;
}

namespace {

struct ExpData {
  std::span<const double> x;
  std::span<const double> y;
  bool offset;
};

int exp_residual(const gsl_vector* p, void* params, gsl_vector* f) {
  const auto* d = static_cast<const ExpData*>(params);
  const double a = gsl_vector_get(p, 0);
  const double b = gsl_vector_get(p, 1);
  const double c = d->offset ? gsl_vector_get(p, 2) : 0.0;
  for (std::size_t i = 0; i < d->x.size(); ++i) gsl_vector_set(f, i, a * std::exp(-b * d->x[i]) + c - d->y[i]);
  return GSL_SUCCESS;
}

int exp_jacobian(const gsl_vector* p, void* params, gsl_matrix* jac) {
  const auto* d = static_cast<const ExpData*>(params);
  const double a = gsl_vector_get(p, 0);
  const double b = gsl_vector_get(p, 1);
  for (std::size_t i = 0; i < d->x.size(); ++i) {
    const double e = std::exp(-b * d->x[i]);
    gsl_matrix_set(jac, i, 0, e);
    gsl_matrix_set(jac, i, 1, -a * d->x[i] * e);
    if (d->offset) gsl_matrix_set(jac, i, 2, 1.0);
  }
  return GSL_SUCCESS;
}

struct WorkspaceDeleter {
  void operator()(gsl_multifit_nlinear_workspace* w) const { gsl_multifit_nlinear_free(w); }
};

// Log-linear least squares on |y|; returns {a, b} with a carrying the sign of y[0].
std::pair<double, double> log_linear_guess(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] != 0.0) {
      lx.push_back(x[i]);
      ly.push_back(std::log(std::abs(y[i])));
    }
  }
  const double sign = std::signbit(y[0]) ? -1.0 : 1.0;
  if (lx.size() < 2) return {y[0], 0.0};
  const std::vector<double> ones(lx.size(), 1.0);
  const FitResult line = weighted_line_fit(lx, ly, ones);
  return {sign * std::exp(line.parameters[0]), -line.parameters[1]};
}

}  // namespace

FitResult exponential_fit_zne(const LambdaSeries& series, bool with_offset) {
  series.validate();
  const auto x = series.grid.values();
  const std::span<const double> y = series.values;
  const std::size_t params = with_offset ? 3 : 2;
  if (y.size() < params) throw std::invalid_argument("exponential fit needs at least as many points as parameters");

  const bool same_sign = std::all_of(y.begin(), y.end(), [&](double v) { return v != 0.0 && std::signbit(v) == std::signbit(y[0]); });
  auto [a0, b0] = log_linear_guess(x, y);

  FitResult fit;
  fit.weighting = "uniform";
  if (same_sign && !with_offset) {
    fit.value = a0;
    fit.parameters = {a0, b0};
  } else {
    ExpData data{x, y, with_offset};
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = exp_residual;
    fdf.df = exp_jacobian;
    fdf.fvv = nullptr;
    fdf.n = y.size();
    fdf.p = params;
    fdf.params = &data;

    gsl_multifit_nlinear_parameters fdf_params = gsl_multifit_nlinear_default_parameters();
    std::unique_ptr<gsl_multifit_nlinear_workspace, WorkspaceDeleter> work(
        gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &fdf_params, y.size(), params));
    gsl_vector* start = gsl_vector_alloc(params);
    gsl_vector_set(start, 0, a0);
    gsl_vector_set(start, 1, b0);
    if (with_offset) gsl_vector_set(start, 2, 0.0);

    gsl_error_handler_t* old_handler = gsl_set_error_handler_off();
    int info = 0;
    int status = gsl_multifit_nlinear_init(start, &fdf, work.get());
    if (status == GSL_SUCCESS) status = gsl_multifit_nlinear_driver(200, 1e-12, 1e-12, 1e-12, nullptr, nullptr, &info, work.get());
    gsl_set_error_handler(old_handler);
    gsl_vector_free(start);

    const gsl_vector* best = gsl_multifit_nlinear_position(work.get());
    fit.parameters.resize(params);
    for (std::size_t i = 0; i < params; ++i) fit.parameters[i] = gsl_vector_get(best, i);
    const bool finite = std::all_of(fit.parameters.begin(), fit.parameters.end(), [](double v) { return std::isfinite(v); });
    if ((status != GSL_SUCCESS && status != GSL_EMAXITER) || !finite) {
      throw FitFailureError("exponential ZNE fit did not converge");
    }
    fit.value = fit.parameters[0] + (with_offset ? fit.parameters[2] : 0.0);
  }

  double rss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double model = fit.parameters[0] * std::exp(-fit.parameters[1] * x[i]);
    if (with_offset) model += fit.parameters[2];
    rss += (model - y[i]) * (model - y[i]);
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

double richardson_zne(const LambdaSeries& series) {
  series.validate();
  const auto weights = taylor_weights(fd_coefficients(series.grid), series.grid.first());
  double value = series.values[0];
  for (std::size_t i = 0; i < weights.size(); ++i) value += weights[i] * series.values[i];
  return value;
}

FitResult urbanek_estimate(const LambdaSeries& target, const LambdaSeries& ncc, double ncc_noiseless, FitKind kind) {
  const AuxSeries aux = compute_aux_series(target, ncc, ncc_noiseless);
  if (kind == FitKind::Exponential) {
    LambdaSeries p1{target.grid, aux.p1, CircuitRole::Target};
    return exponential_fit_zne(p1);
  }
  const std::vector<double> ones(aux.p1.size(), 1.0);
  FitResult fit = weighted_line_fit(target.grid.values(), aux.p1, ones);
  fit.weighting = "uniform";
  return fit;
}

}  // namespace nre
