#include "nre/finite_difference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nre {

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("lambda grid needs at least two points");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0) throw std::invalid_argument("lambda values must be finite and >= 0");
    if (i > 0 && !(values_[i] > values_[i - 1])) throw std::invalid_argument("lambda grid must be strictly increasing");
  }
}

LambdaGrid LambdaGrid::uniform(double first, double h, int points) {
  if (points < 2) throw std::invalid_argument("lambda grid needs at least two points");
  if (!(h > 0)) throw std::invalid_argument("lambda spacing must be positive");
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = first + h * i;
  return LambdaGrid(std::move(v));
}

std::vector<double> LambdaGrid::spacings() const {
  std::vector<double> t(values_.size() - 1);
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) t[i] = values_[i + 1] - values_[i];
  return t;
}

bool LambdaGrid::is_uniform() const {
  const auto t = spacings();
  return std::all_of(t.begin(), t.end(), [&](double s) { return std::abs(s - t.front()) <= 1e-12; });
}

double LambdaGrid::step() const {
  if (!is_uniform()) throw std::logic_error("lambda grid is not uniform");
  return values_[1] - values_[0];
}

FdCoefficients fd_coefficients_moment(std::span<const double> offsets) {
  const auto m = static_cast<Eigen::Index>(offsets.size());
  if (m < 2) throw std::invalid_argument("finite differences need at least two points");
  for (std::size_t i = 1; i < offsets.size(); ++i) {
    if (!(offsets[i] > offsets[i - 1])) throw std::invalid_argument("grid offsets must be strictly increasing");
  }
  // Moment matrix P_{k,i} = x_i^k. Row j of the result solves P a_j = j! e_j,
  // i.e. a_{j,i} = j! (P^{-1})_{i,j}.
  Eigen::MatrixXd p(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double power = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      p(k, i) = power;
      power *= offsets[static_cast<std::size_t>(i)] - offsets[0];
    }
  }
  const Eigen::MatrixXd inv = p.fullPivLu().inverse();
  FdCoefficients out;
  out.weights.resize(m - 1, m);
  double factorial = 1.0;
  for (Eigen::Index j = 1; j < m; ++j) {
    factorial *= static_cast<double>(j);
    for (Eigen::Index i = 0; i < m; ++i) out.weights(j - 1, i) = factorial * inv(i, j);
  }
  out.offsets.assign(offsets.begin(), offsets.end());
  for (double& x : out.offsets) x -= offsets[0];
  return out;
}

FdCoefficients fd_coefficients_uniform(int points, double h) {
  if (points < 2) throw std::invalid_argument("finite differences need at least two points");
  if (!(h > 0)) throw std::invalid_argument("spacing h must be positive");
  std::vector<double> offsets(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) offsets[static_cast<std::size_t>(i)] = h * i;
  return fd_coefficients_moment(offsets);
}

FdCoefficients fd_coefficients_nonuniform(std::span<const double> spacings) {
  if (spacings.empty()) throw std::invalid_argument("need at least one spacing");
  for (double t : spacings) {
    if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("spacings must be positive and finite");
  }
  FdCoefficients out;
  out.offsets.push_back(0.0);
  for (double t : spacings) out.offsets.push_back(out.offsets.back() + t);

  if (spacings.size() == 1) {
    const double t1 = spacings[0];
    out.weights.resize(1, 2);
    out.weights << -1.0 / t1, 1.0 / t1;
    return out;
  }
  if (spacings.size() == 2) {
    const double t1 = spacings[0];
    const double t2 = spacings[1];
    const double r = t2 / t1;
    const double c1 = 1.0 / ((1 + r) * (1 + r) * t1 - (t1 + t2));
    const double c2 = 2.0 / (t2 * (t1 + t2));
    out.weights.resize(2, 3);
    out.weights << -c1 * (r * r + 2 * r), c1 * (1 + r) * (1 + r), -c1,
                    c2 * r, -c2 * (1 + r), c2;
    return out;
  }
  return fd_coefficients_moment(out.offsets);
}

FdCoefficients fd_coefficients(const LambdaGrid& grid) {
  if (grid.is_uniform()) return fd_coefficients_uniform(static_cast<int>(grid.size()), grid.step());
  const auto t = grid.spacings();
  return fd_coefficients_nonuniform(t);
}

std::vector<double> taylor_weights(const FdCoefficients& coefficients, double lambda1) {
  std::vector<double> v(static_cast<std::size_t>(coefficients.points()), 0.0);
  double factor = 1.0;
  for (int j = 1; j <= coefficients.orders(); ++j) {
    factor *= -lambda1 / j;
    for (int i = 0; i < coefficients.points(); ++i) v[static_cast<std::size_t>(i)] += factor * coefficients.weights(j - 1, i);
  }
  return v;
}

std::vector<double> taylor_weights(int points, double h, double lambda1) {
  return taylor_weights(fd_coefficients_uniform(points, h), lambda1);
}

}  // namespace nre
