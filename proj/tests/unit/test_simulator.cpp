#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dense_oracle.hpp"
#include "nre/circuit.hpp"
#include "nre/simulator.hpp"

using namespace nre;

namespace {

Circuit random_circuit(int n, int gates, std::mt19937_64& rng, bool clifford) {
  std::uniform_int_distribution<int> qubit(0, n - 1);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> quarter(0, 3);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  Circuit c(n);
  while (static_cast<int>(c.size()) < gates) {
    const int k = kind(rng);
    if (k == 3) {
      const int a = qubit(rng), b = qubit(rng);
      if (a != b) c.cz(a, b);
    } else {
      c.add(Gate::rotation(static_cast<Axis>(k), clifford ? quarter(rng) * kPi / 2 : angle(rng), qubit(rng)));
    }
  }
  return c;
}

// Kraus-form reference: rho -> (1-p) rho + p/3 sum_P P rho P on both CZ qubits.
oracle::Mat dense_noisy(const Circuit& c, double p) {
  const int n = c.width();
  const auto dim = Eigen::Index{1} << n;
  oracle::Mat rho = oracle::Mat::Zero(dim, dim);
  rho(0, 0) = 1.0;
  for (const Gate& g : c.gates()) {
    const oracle::Mat u = oracle::gate_unitary(n, g);
    rho = u * rho * u.adjoint();
    if (!g.is_two_qubit()) continue;
    for (int q : g.qubits) {
      oracle::Mat next = (1 - p) * rho;
      for (char s : {'X', 'Y', 'Z'}) {
        const oracle::Mat k = oracle::single(n, q, oracle::pauli(s));
        next += p / 3 * k * rho * k;
      }
      rho = next;
    }
  }
  return rho;
}

std::string random_pauli(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 3);
  std::string s;
  for (int q = 0; q < n; ++q) s.push_back("IXYZ"[d(rng)]);
  return s;
}

}  // namespace

TEST(DensityMatrix, EmptyCircuitIsGroundState) {
  const DensityMatrix rho = simulate_density(Circuit(3), {0.05, AmplificationMode::RateScaled, {}}, 1.0);
  EXPECT_EQ(rho.matrix()(0, 0), std::complex<double>(1.0));
  EXPECT_NEAR(rho.matrix().cwiseAbs().sum(), 1.0, 1e-15);
}

TEST(DensityMatrix, SingleCzExample) {
  Circuit c(2);
  c.cz(0, 1);
  const DensityMatrix rho = simulate_density(c, {0.03, AmplificationMode::RateScaled, {}}, 1.0);
  EXPECT_NEAR(exact_expectation(rho, pauli_string_group("ZI")), 0.96, 1e-14);
}

TEST(DensityMatrix, NoiselessIsPureEvolution) {
  std::mt19937_64 rng(1);
  const Circuit c = random_circuit(4, 40, rng, false);
  const DensityMatrix rho = simulate_density(c, {}, 1.0);
  const Eigen::VectorXcd psi = oracle::circuit_unitary(c).col(0);
  const double fidelity = (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
  EXPECT_NEAR(fidelity, 1.0, 1e-12);
  EXPECT_NEAR((rho.matrix() * rho.matrix()).trace().real(), 1.0, 1e-12);
}

TEST(DensityMatrix, MatchesKrausReference) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit c = random_circuit(4, 30, rng, false);
    const oracle::Mat expected = dense_noisy(c, 0.07);
    const DensityMatrix rho = simulate_density(c, {0.07, AmplificationMode::RateScaled, {}}, 1.0);
    EXPECT_LE((rho.matrix() - expected).norm(), 1e-12);
  }
}

TEST(DensityMatrix, RateScaledUsesLambdaTimesF) {
  std::mt19937_64 rng(3);
  const Circuit c = random_circuit(3, 20, rng, false);
  const DensityMatrix a = simulate_density(c, {0.02, AmplificationMode::RateScaled, {}}, 2.5);
  EXPECT_LE((a.matrix() - dense_noisy(c, 0.05)).norm(), 1e-12);
  const DensityMatrix b = simulate_density(c, {0.02, AmplificationMode::FoldedCircuit, {}}, 2.5);
  EXPECT_LE((b.matrix() - dense_noisy(c, 0.02)).norm(), 1e-12);
}

TEST(DensityMatrix, InvariantsHoldAfterEveryOperation) {
  std::mt19937_64 rng(4);
  const Circuit c = random_circuit(4, 60, rng, false);
  DensityMatrix rho(4);
  for (const Gate& g : c.gates()) {
    rho.apply(g);
    if (g.is_two_qubit()) {
      rho.apply_depolarizing(g.qubits[0], 0.2);
      rho.apply_depolarizing(g.qubits[1], 0.2);
    }
    ASSERT_NEAR(rho.trace().real(), 1.0, 1e-12);
    ASSERT_NEAR(rho.trace().imag(), 0.0, 1e-12);
    ASSERT_LE(rho.hermiticity_error(), 1e-12);
    ASSERT_GE(rho.min_eigenvalue(), -1e-10);
  }
}

TEST(Depolarizing, ContractsEveryNontrivialPauli) {
  std::mt19937_64 rng(5);
  const oracle::Mat rho0 = oracle::random_density(3, rng);
  DensityMatrix rho = DensityMatrix::from_matrix(rho0);
  const double p = 0.13;
  rho.apply_depolarizing(1, p);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
  for (int i = 0; i < 64; ++i) {
    std::string s;
    for (int q = 0; q < 3; ++q) s.push_back("IXYZ"[(i >> (2 * q)) & 3]);
    const double before = oracle::expectation(rho0, oracle::pauli_string(s));
    const double after = oracle::expectation(rho.matrix(), oracle::pauli_string(s));
    const double factor = s[1] == 'I' ? 1.0 : 1.0 - 4.0 * p / 3.0;
    EXPECT_NEAR(after, factor * before, 1e-13) << s;
  }
}

TEST(Simulator, RejectsBadRatesAndWidths) {
  Circuit c(2);
  c.cz(0, 1);
  EXPECT_THROW(simulate_density(c, {0.4, AmplificationMode::RateScaled, {}}, 3.0), std::invalid_argument);
  EXPECT_THROW(simulate_density(Circuit(11), {}, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(simulate_density(Circuit(11), {}, 1.0, 11));
  EXPECT_THROW((NoiseSpec{1.0, AmplificationMode::RateScaled, {}}.validate()), std::invalid_argument);
  EXPECT_THROW((NoiseSpec{0.1, AmplificationMode::Perturbed, {1.0, 0.0}}.validate()), std::invalid_argument);
}

TEST(Simulator, AmplificationModeNames) {
  for (auto m : {AmplificationMode::FoldedCircuit, AmplificationMode::RateScaled, AmplificationMode::Perturbed}) {
    EXPECT_EQ(parse_amplification_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_amplification_mode("scaled"), std::invalid_argument);
}

TEST(ExactExpectation, Examples) {
  const Topology t = Topology::line(3);
  const auto groups = tfim_measurement_groups(t, 2.0);
  Circuit plus(3);
  for (int q = 0; q < 3; ++q) plus.ry(kPi / 2, q);
  const DensityMatrix rho = simulate_density(plus, {}, 1.0);
  EXPECT_NEAR(exact_expectation(rho, groups[1]), -6.0, 1e-12);

  const DensityMatrix mixed = DensityMatrix::maximally_mixed(3);
  EXPECT_NEAR(exact_expectation(mixed, pauli_string_group("ZIZ")), 0.0, 1e-15);
  EXPECT_NEAR(exact_expectation(mixed, pauli_string_group("XYI")), 0.0, 1e-15);
}

TEST(Sampling, GroundStateCountsAreDeterministic) {
  Rng rng(9);
  const CountsTable t = sample_counts(DensityMatrix(3), pauli_string_group("ZZI"), 500, rng);
  ASSERT_EQ(t.counts.size(), 1u);
  EXPECT_EQ(t.counts.at(0), 500u);
  EXPECT_EQ(t.total(), 500u);
}

TEST(Sampling, ConcentratesOnExactExpectation) {
  std::mt19937_64 gen(6);
  const Circuit c = random_circuit(4, 30, gen, false);
  const DensityMatrix rho = simulate_density(c, {0.02, AmplificationMode::RateScaled, {}}, 1.0);
  const MeasurementGroup group = pauli_string_group("XZIY");
  const double exact = exact_expectation(rho, group);
  const std::uint64_t shots = 1'000'000;
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const CountsTable t = sample_counts(rho, group, shots, rng);
    ASSERT_EQ(t.total(), shots);
    if (std::abs(expectation_from_counts(t, group) - exact) <= 4.0 / std::sqrt(static_cast<double>(shots))) ++inside;
  }
  EXPECT_GE(inside, 19);
}

TEST(Sampling, SameSeedSameCounts) {
  std::mt19937_64 gen(7);
  const DensityMatrix rho = simulate_density(random_circuit(3, 20, gen, false), {0.01, AmplificationMode::RateScaled, {}}, 1.0);
  Rng a(42), b(42);
  EXPECT_EQ(sample_counts(rho, pauli_string_group("XXZ"), 1000, a).counts,
            sample_counts(rho, pauli_string_group("XXZ"), 1000, b).counts);
}

TEST(ExpectationFromCounts, Examples) {
  MeasurementGroup group;
  group.width = 2;
  group.terms = {{1.0, 0b01}};
  CountsTable t;
  t.qubits = 2;
  t.shots = 10;
  t.counts = {{0b00, 10}};
  EXPECT_EQ(expectation_from_counts(t, group), 1.0);
  t.counts = {{0b00, 5}, {0b01, 5}};
  EXPECT_EQ(expectation_from_counts(t, group), 0.0);
  t.shots = 0;
  t.counts.clear();
  EXPECT_THROW(expectation_from_counts(t, group), std::invalid_argument);
}

TEST(CliffordOracle, Examples) {
  Circuit c(2);
  c.cz(0, 1);
  EXPECT_NEAR(clifford_pauli_oracle(c, pauli_string_group("ZI"), 0.03, 1.0), 0.96, 1e-14);
  EXPECT_NEAR(clifford_pauli_oracle(Circuit(2), pauli_string_group("ZZ"), 0.3, 1.0), 1.0, 1e-15);
  Circuit bad(1);
  bad.rx(0.1, 0);
  EXPECT_THROW(clifford_pauli_oracle(bad, pauli_string_group("Z"), 0.0, 1.0), std::invalid_argument);
}

TEST(CliffordOracle, MatchesDenseSimulation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const Circuit c = random_circuit(5, 40, rng, true);
    const std::string p = random_pauli(5, rng);
    const MeasurementGroup group = pauli_string_group(p, 1.0);
    const DensityMatrix rho = simulate_density(c, {0.02, AmplificationMode::RateScaled, {}}, 1.5);
    EXPECT_NEAR(clifford_pauli_oracle(c, group, 0.02, 1.5), exact_expectation(rho, group), 1e-10) << p;
  }
}

TEST(CliffordOracle, ProductFormDecay) {
  // All-Clifford circuits decay as a product of (1 - 4 lambda f / 3) factors;
  // at small f log|<O>(lambda)| is linear in lambda to O((f lambda)^2).
  std::mt19937_64 rng(10);
  Circuit c = random_circuit(4, 20, rng, true);
  c.append(c.inverse());
  const MeasurementGroup group = pauli_string_group("ZZII");
  const double ideal = clifford_pauli_oracle(c, group, 0.0, 1.0);
  ASSERT_NEAR(ideal, 1.0, 1e-14);
  const double f = 0.01;
  std::vector<double> logs;
  for (double lambda : {1.0, 2.0, 3.0}) logs.push_back(std::log(std::abs(clifford_pauli_oracle(c, group, f, lambda) / ideal)));
  EXPECT_LT(std::abs(logs[0] - 2 * logs[1] + logs[2]), 1e-3);
}

TEST(GroundEnergy, Examples) {
  EXPECT_NEAR(exact_ground_energy(Topology{3, {}}, 1.5), -4.5, 1e-12);
  EXPECT_NEAR(exact_ground_energy(Topology{2, {{0, 1}}}, 2.0), -std::sqrt(17.0), 1e-12);
  const Topology star = parse_topology("star-5");
  Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::tfim_hamiltonian(star, 2.0));
  EXPECT_NEAR(exact_ground_energy(star, 2.0), es.eigenvalues()(0), 1e-10);
  EXPECT_THROW(exact_ground_energy(Topology::line(13), 1.0), std::invalid_argument);
}

TEST(CountsIo, RoundTrip) {
  std::mt19937_64 gen(11);
  const DensityMatrix rho = simulate_density(random_circuit(4, 30, gen, false), {0.01, AmplificationMode::RateScaled, {}}, 1.0);
  Rng rng(1);
  CountsTable t = sample_counts(rho, pauli_string_group("XZZY"), 4000, rng);
  t.circuit = "target";
  t.group = 1;
  t.lambda = 2.5;
  std::stringstream ss;
  write_counts(ss, t);
  const CountsTable back = read_counts(ss);
  EXPECT_EQ(back.counts, t.counts);
  EXPECT_EQ(back.shots, t.shots);
  EXPECT_EQ(back.qubits, 4);
  EXPECT_EQ(back.circuit, "target");
  EXPECT_EQ(back.group, 1);
  EXPECT_EQ(back.lambda, 2.5);
}

TEST(CountsIo, BitstringOrderIsQubitOrder) {
  EXPECT_EQ(bitstring(0b0001, 4), "1000");
  EXPECT_EQ(parse_bitstring("0010"), 0b0100u);
  std::istringstream in("shots 3 qubits 2 circuit c group 0 lambda 1\n10 2\n11 1\n");
  const CountsTable t = read_counts(in);
  EXPECT_EQ(t.counts.at(0b01), 2u);
  EXPECT_EQ(t.counts.at(0b11), 1u);
}

TEST(CountsIo, RejectsInconsistentFiles) {
  for (const char* text : {"shots 3 qubits 2 circuit c group 0 lambda 1\n10 2\n",
                           "shots 3 qubits 2 circuit c group 0 lambda 1\n102 3\n",
                           "shots 3 qubits 2 circuit c group 0 lambda 1\n1x 3\n", "10 3\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_counts(in), std::invalid_argument) << text;
  }
}
