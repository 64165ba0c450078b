#include <gtest/gtest.h>
#include <gsl/gsl_fit.h>

#include <cmath>
#include <random>

#include "nre/errors.hpp"
#include "nre/estimators.hpp"
#include "nre/simulator.hpp"
#include "nre/statistics.hpp"

using namespace nre;

TEST(WeightedLineFit, MatchesGslWlinear) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 3 + static_cast<std::size_t>(trial % 40);
    std::vector<double> x(k), y(k), w(k);
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = u(rng);
      y[i] = 1.3 - 0.7 * x[i] + 0.2 * n(rng);
      w[i] = 0.1 + u(rng);
    }
    double c0, c1, cov00, cov01, cov11, chisq;
    gsl_fit_wlinear(x.data(), 1, w.data(), 1, y.data(), 1, k, &c0, &c1, &cov00, &cov01, &cov11, &chisq);
    const FitResult fit = weighted_line_fit(x, y, w);
    EXPECT_NEAR(fit.parameters[0], c0, 1e-12);
    EXPECT_NEAR(fit.parameters[1], c1, 1e-12);
    EXPECT_NEAR(fit.residual_norm, std::sqrt(chisq), 1e-10);
  }
}

TEST(WeightedExtrapolation, ExactLine) {
  const std::vector<double> d{0.1, 0.2, 0.3}, y{1.01, 1.02, 1.03};
  const FitResult fit = weighted_linear_extrapolation(d, y);
  EXPECT_NEAR(fit.value, 1.0, 1e-12);
  EXPECT_NEAR(fit.parameters[1], 0.1, 1e-12);
}

TEST(WeightedExtrapolation, ExactLineAnyWeights) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(10), y(10), w(10);
    for (int i = 0; i < 10; ++i) {
      x[i] = u(rng);
      y[i] = -2.0 + 3.0 * x[i];
      w[i] = 1e-3 + u(rng);
    }
    const FitResult fit = weighted_line_fit(x, y, w);
    EXPECT_NEAR(fit.value, -2.0, 1e-12);
    EXPECT_NEAR(fit.parameters[1], 3.0, 1e-12);
  }
}

TEST(WeightedExtrapolation, ConstantValues) {
  const std::vector<double> d{0.1, 0.5, 0.9}, y{4.0, 4.0, 4.0};
  const FitResult fit = weighted_linear_extrapolation(d, y);
  EXPECT_NEAR(fit.value, 4.0, 1e-14);
  EXPECT_NEAR(fit.parameters[1], 0.0, 1e-14);
}

TEST(WeightedExtrapolation, IdenticalDispersionsAreCollinear) {
  const std::vector<double> d{0.3, 0.3, 0.3}, y{1.0, 2.0, 6.0};
  const FitResult fit = weighted_linear_extrapolation(d, y);
  EXPECT_TRUE(fit.collinear);
  EXPECT_NEAR(fit.value, 3.0, 1e-14);
}

TEST(WeightedExtrapolation, FloorsZeroDispersion) {
  const std::vector<double> d{0.0, 0.0, 0.5}, y{2.0, 2.0, 3.0};
  const FitResult fit = weighted_linear_extrapolation(d, y, 1e-6);
  EXPECT_TRUE(std::isfinite(fit.value));
  EXPECT_NEAR(fit.value, 2.0, 1e-9);
}

TEST(WeightedExtrapolation, RejectsBadInput) {
  const std::vector<double> one{0.1}, two{0.1, 0.2};
  EXPECT_THROW(weighted_linear_extrapolation(one, one), std::invalid_argument);
  EXPECT_THROW(weighted_linear_extrapolation(two, one), std::invalid_argument);
  EXPECT_THROW(weighted_linear_extrapolation(two, two, 0.0), std::invalid_argument);
}

TEST(WeightedExtrapolation, WeightingHelpsHeteroscedasticData) {
  std::vector<double> weighted_err, plain_err;
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::normal_distribution<double> n;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> d(200), y(200), ones(200, 1.0);
    for (int i = 0; i < 200; ++i) {
      d[i] = u(rng);
      y[i] = 1.0 + 0.5 * d[i] + d[i] * n(rng);
    }
    weighted_err.push_back(std::abs(weighted_linear_extrapolation(d, y).value - 1.0));
    plain_err.push_back(std::abs(weighted_line_fit(d, y, ones).value - 1.0));
  }
  EXPECT_LT(median(weighted_err), median(plain_err));
}

TEST(ExponentialFit, ExactData) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  LambdaSeries s{grid, {}, CircuitRole::Target};
  for (double l : grid.values()) s.values.push_back(0.8 * std::exp(-0.5 * l));
  const FitResult fit = exponential_fit_zne(s);
  EXPECT_NEAR(fit.value, 0.8, 1e-10);
  EXPECT_NEAR(fit.parameters[1], 0.5, 1e-10);
}

TEST(ExponentialFit, NegativeData) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  LambdaSeries s{grid, {}, CircuitRole::Target};
  for (double l : grid.values()) s.values.push_back(-10.5 * std::exp(-0.2 * l));
  EXPECT_NEAR(exponential_fit_zne(s).value, -10.5, 1e-10);
}

TEST(ExponentialFit, ConstantSeries) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  const FitResult fit = exponential_fit_zne({grid, {2.5, 2.5, 2.5}, CircuitRole::Target});
  EXPECT_NEAR(fit.value, 2.5, 1e-12);
  EXPECT_NEAR(fit.parameters[1], 0.0, 1e-12);
}

TEST(ExponentialFit, ScaleEquivariant) {
  const LambdaGrid grid({1.0, 1.5, 2.0, 3.0});
  const LambdaSeries s{grid, {0.9, 0.71, 0.62, 0.40}, CircuitRole::Target};
  LambdaSeries scaled = s;
  for (double& v : scaled.values) v *= 3.0;
  const FitResult a = exponential_fit_zne(s), b = exponential_fit_zne(scaled);
  EXPECT_NEAR(b.parameters[0], 3.0 * a.parameters[0], 1e-12);
  EXPECT_NEAR(b.parameters[1], a.parameters[1], 1e-12);
}

TEST(ExponentialFit, SignChangeUsesNonlinearPath) {
  const LambdaGrid grid({1.0, 2.0, 3.0, 4.0});
  LambdaSeries s{grid, {}, CircuitRole::Target};
  for (double l : grid.values()) s.values.push_back(1.2 * std::exp(-0.7 * l) - 0.1);
  const FitResult with_offset = exponential_fit_zne(s, true);
  EXPECT_NEAR(with_offset.value, 1.1, 1e-6);
  ASSERT_EQ(with_offset.parameters.size(), 3u);
  EXPECT_NEAR(with_offset.parameters[2], -0.1, 1e-6);
}

TEST(ExponentialFit, CliffordDecayIsSingleExponential) {
  Circuit c(3);
  for (int q = 0; q < 3; ++q) c.ry(kPi / 2, q);
  c.cz(0, 1);
  c.rx(kPi / 2, 1);
  c.cz(1, 2);
  c.cz(0, 2);
  c.rz(kPi, 0);
  c.cz(0, 1);
  c.append(c.inverse());
  const MeasurementGroup group = pauli_string_group("ZIZ");
  ASSERT_GT(std::abs(clifford_pauli_oracle(c, group, 0.0, 1.0)), 0.5);
  const LambdaGrid grid({1.0, 2.0, 3.0});
  LambdaSeries s{grid, {}, CircuitRole::NoiseCanceling};
  for (double l : grid.values()) s.values.push_back(clifford_pauli_oracle(c, group, 0.001, l));
  EXPECT_LT(exponential_fit_zne(s).residual_norm, 1e-4);
}

TEST(Richardson, Example) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  EXPECT_NEAR(richardson_zne({grid, {0.5, 0.4, 0.32}, CircuitRole::Target}), 0.62, 1e-12);
  EXPECT_NEAR(richardson_zne({grid, {7.0, 7.0, 7.0}, CircuitRole::Target}), 7.0, 1e-12);
}

TEST(Richardson, ExactOnPolynomials) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int m = 2; m <= 5; ++m) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(m));
      for (double& x : c) x = coef(rng);
      const LambdaGrid grid = LambdaGrid::uniform(1.0, 0.5, m);
      LambdaSeries s{grid, {}, CircuitRole::Target};
      for (double l : grid.values()) {
        double y = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) y = y * l + *it;
        s.values.push_back(y);
      }
      EXPECT_NEAR(richardson_zne(s), c[0], 1e-9);
    }
  }
}

TEST(Urbanek, SharedDecayIsExact) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  LambdaSeries t{grid, {}, CircuitRole::Target}, n{grid, {}, CircuitRole::NoiseCanceling};
  for (double l : grid.values()) {
    t.values.push_back(-3.0 * std::exp(-0.4 * l));
    n.values.push_back(1.5 * std::exp(-0.4 * l));
  }
  EXPECT_NEAR(urbanek_estimate(t, n, 1.5).value, -3.0, 1e-10);
  EXPECT_NEAR(urbanek_estimate(t, n, 1.5, FitKind::Exponential).value, -3.0, 1e-10);
}

TEST(Urbanek, NoiselessInput) {
  const LambdaGrid grid({1.0, 2.0});
  EXPECT_NEAR(urbanek_estimate({grid, {0.3, 0.3}, CircuitRole::Target}, {grid, {2.0, 2.0}, CircuitRole::NoiseCanceling}, 2.0).value,
              0.3, 1e-15);
}

TEST(Urbanek, EqualsP1Extrapolation) {
  const LambdaGrid grid({1.0, 2.0, 3.0});
  const LambdaSeries t{grid, {0.81, 0.62, 0.50}, CircuitRole::Target};
  const LambdaSeries n{grid, {0.45, 0.33, 0.24}, CircuitRole::NoiseCanceling};
  const AuxSeries aux = compute_aux_series(t, n, 0.6);
  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(urbanek_estimate(t, n, 0.6).value, weighted_line_fit(grid.values(), aux.p1, ones).value, 1e-14);
  EXPECT_THROW(urbanek_estimate(t, {grid, {0.45, -0.1, 0.2}, CircuitRole::NoiseCanceling}, 0.6), SignViolationError);
}

TEST(Statistics, Basics) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(mean(x), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(x), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(median(x), 2.5);
  const std::vector<double> odd{5, 1, 3};
  EXPECT_DOUBLE_EQ(median(odd), 3.0);
}

TEST(Statistics, SpearmanDetectsMonotoneRelation) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  std::vector<double> x(500), y(500);
  for (int i = 0; i < 500; ++i) {
    x[i] = n(rng);
    y[i] = std::exp(x[i]) + 0.5 * n(rng);
  }
  const Correlation c = spearman(x, y);
  EXPECT_GT(c.rho, 0.5);
  EXPECT_LT(c.p_value, 1e-10);
  for (double& v : y) v = n(rng);
  EXPECT_GT(spearman(x, y).p_value, 1e-3);
}
