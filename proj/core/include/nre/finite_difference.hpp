#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace nre {

/// Ascending noise scale factors lambda_1 < ... < lambda_M, M >= 2.
class LambdaGrid {
 public:
  LambdaGrid() = default;
  explicit LambdaGrid(std::vector<double> values);

  /// [first, first + h, ..., first + (M-1) h]
  static LambdaGrid uniform(double first, double h, int points);

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double first() const { return values_.front(); }
  double last() const { return values_.back(); }

  /// Consecutive spacings t_i = lambda_{i+1} - lambda_i.
  std::vector<double> spacings() const;
  /// True when all spacings agree to 1e-12.
  bool is_uniform() const;
  /// Nominal spacing; throws std::logic_error for non-uniform grids.
  double step() const;

  friend bool operator==(const LambdaGrid&, const LambdaGrid&) = default;

 private:
  std::vector<double> values_;
};

/// Forward finite-difference weights at the first grid point. Row j-1 holds
/// the weights of the order-j derivative; column i multiplies the value at
/// grid point i. Every row sums to zero.
struct FdCoefficients {
  Eigen::MatrixXd weights;
  /// Grid offsets from the first point (0, t_1, t_1 + t_2, ...).
  std::vector<double> offsets;

  int points() const { return static_cast<int>(weights.cols()); }
  int orders() const { return static_cast<int>(weights.rows()); }
};

/// Generic solve of sum_i c_i (x_i - x_1)^k = k! delta_kj, k = 0..M-1.
FdCoefficients fd_coefficients_moment(std::span<const double> offsets);

/// Uniform spacing h with M points.
FdCoefficients fd_coefficients_uniform(int points, double h);

/// Spacings t (M-1 entries). M = 2 and M = 3 use closed forms; larger M falls
/// back to the moment solve.
FdCoefficients fd_coefficients_nonuniform(std::span<const double> spacings);

/// Coefficients matching a grid: uniform when the grid is, otherwise non-uniform.
FdCoefficients fd_coefficients(const LambdaGrid& grid);

/// V_i = sum_{j=1}^{M-1} (-lambda_1)^j / j! * a_{ji}.
std::vector<double> taylor_weights(const FdCoefficients& coefficients, double lambda1);
std::vector<double> taylor_weights(int points, double h, double lambda1);

}  // namespace nre
