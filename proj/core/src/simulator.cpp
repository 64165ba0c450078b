#include "nre/simulator.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace nre {

namespace {

using cd = std::complex<double>;

std::array<cd, 4> rotation_entries(Axis axis, double theta) {
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const cd mis{0.0, -s};
  switch (axis) {
    case Axis::X: return {cd{c}, mis, mis, cd{c}};
    case Axis::Y: return {cd{c}, cd{-s}, cd{s}, cd{c}};
    case Axis::Z: return {cd{c, -s}, cd{0}, cd{0}, cd{c, s}};
  }
  return {};
}

// --- Pauli propagation -------------------------------------------------------

enum class Pauli : std::uint8_t { I, X, Y, Z };

Eigen::Matrix2cd pauli_matrix(Pauli p) {
  Eigen::Matrix2cd m;
  switch (p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, cd{0, -1}, cd{0, 1}, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

struct SignedPauli {
  Pauli pauli;
  double sign;
};

// G^dagger sigma G for a Clifford rotation G, found by matching the 2x2
// product against +-X, +-Y, +-Z.
SignedPauli conjugate_by_rotation(Axis axis, double theta, Pauli p) {
  if (p == Pauli::I) return {Pauli::I, 1.0};
  const auto e = rotation_entries(axis, theta);
  Eigen::Matrix2cd g;
  g << e[0], e[1], e[2], e[3];
  const Eigen::Matrix2cd m = g.adjoint() * pauli_matrix(p) * g;
  for (Pauli q : {Pauli::X, Pauli::Y, Pauli::Z}) {
    const Eigen::Matrix2cd ref = pauli_matrix(q);
    if ((m - ref).norm() < 1e-9) return {q, 1.0};
    if ((m + ref).norm() < 1e-9) return {q, -1.0};
  }
  throw std::invalid_argument("rotation is not Clifford; Pauli oracle needs angles in {0, pi/2, pi, 3pi/2}");
}

struct PauliString {
  std::vector<std::uint8_t> x;
  std::vector<std::uint8_t> z;
  double coefficient = 1.0;

  Pauli at(int q) const {
    const bool xb = x[static_cast<std::size_t>(q)];
    const bool zb = z[static_cast<std::size_t>(q)];
    if (xb && zb) return Pauli::Y;
    if (xb) return Pauli::X;
    if (zb) return Pauli::Z;
    return Pauli::I;
  }

  void set(int q, Pauli p) {
    x[static_cast<std::size_t>(q)] = (p == Pauli::X || p == Pauli::Y);
    z[static_cast<std::size_t>(q)] = (p == Pauli::Z || p == Pauli::Y);
  }

  void conjugate(const Gate& g) {
    if (g.kind == GateKind::Rotation) {
      const int q = g.qubits[0];
      const auto r = conjugate_by_rotation(g.axis, g.angle, at(q));
      set(q, r.pauli);
      coefficient *= r.sign;
      return;
    }
    // CZ maps X_a -> X_a Z_b and X_b -> Z_a X_b.
    const auto a = static_cast<std::size_t>(g.qubits[0]);
    const auto b = static_cast<std::size_t>(g.qubits[1]);
    if (x[a] && x[b] && (z[a] != z[b])) coefficient = -coefficient;
    z[a] ^= x[b];
    z[b] ^= x[a];
  }
};

}  // namespace

// --- DensityMatrix ---------------------------------------------------------

DensityMatrix::DensityMatrix(int n) : n_(n) {
  if (n < 0 || n > 30) throw std::invalid_argument("qubit count out of range");
  const Eigen::Index dim = Eigen::Index{1} << n;
  rho_ = Eigen::MatrixXcd::Zero(dim, dim);
  rho_(0, 0) = 1.0;
}

DensityMatrix DensityMatrix::from_matrix(Eigen::MatrixXcd rho) {
  const auto dim = static_cast<std::uint64_t>(rho.rows());
  if (rho.rows() != rho.cols() || !std::has_single_bit(dim)) {
    throw std::invalid_argument("density matrix must be square with power-of-two dimension");
  }
  DensityMatrix d;
  d.n_ = std::countr_zero(dim);
  d.rho_ = std::move(rho);
  return d;
}

DensityMatrix DensityMatrix::maximally_mixed(int n) {
  DensityMatrix d(n);
  const Eigen::Index dim = d.rho_.rows();
  d.rho_ = Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
  return d;
}

void DensityMatrix::apply(const Gate& gate) {
  if (gate.kind == GateKind::CZ) {
    apply_cz(gate.qubits[0], gate.qubits[1]);
  } else {
    apply_rotation(gate.axis, gate.angle, gate.qubits[0]);
  }
}

void DensityMatrix::apply_rotation(Axis axis, double theta, int q) {
  const auto [u00, u01, u10, u11] = rotation_entries(axis, theta);
  const Eigen::Index dim = rho_.rows();
  const Eigen::Index bit = Eigen::Index{1} << q;
  // rho <- U rho
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
      if (r0 & bit) continue;
      const Eigen::Index r1 = r0 | bit;
      const cd a = rho_(r0, c);
      const cd b = rho_(r1, c);
      rho_(r0, c) = u00 * a + u01 * b;
      rho_(r1, c) = u10 * a + u11 * b;
    }
  }
  // rho <- rho U^dagger
  const cd v00 = std::conj(u00), v01 = std::conj(u01), v10 = std::conj(u10), v11 = std::conj(u11);
  for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
    if (c0 & bit) continue;
    const Eigen::Index c1 = c0 | bit;
    for (Eigen::Index r = 0; r < dim; ++r) {
      const cd a = rho_(r, c0);
      const cd b = rho_(r, c1);
      rho_(r, c0) = a * v00 + b * v01;
      rho_(r, c1) = a * v10 + b * v11;
    }
  }
}

void DensityMatrix::apply_cz(int a, int b) {
  const Eigen::Index mask = (Eigen::Index{1} << a) | (Eigen::Index{1} << b);
  const Eigen::Index dim = rho_.rows();
  for (Eigen::Index c = 0; c < dim; ++c) {
    const bool cs = (c & mask) == mask;
    for (Eigen::Index r = 0; r < dim; ++r) {
      if (cs != ((r & mask) == mask)) rho_(r, c) = -rho_(r, c);
    }
  }
}

void DensityMatrix::apply_depolarizing(int q, double p) {
  if (p == 0.0) return;
  const double shrink = 1.0 - 4.0 * p / 3.0;
  const Eigen::Index dim = rho_.rows();
  const Eigen::Index bit = Eigen::Index{1} << q;
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      if ((r & bit) != (c & bit)) {
        rho_(r, c) *= shrink;
      } else if (!(r & bit)) {
        const cd a = rho_(r, c);
        const cd d = rho_(r | bit, c | bit);
        const cd mean = 0.5 * (a + d);
        const cd half_diff = 0.5 * shrink * (a - d);
        rho_(r, c) = mean + half_diff;
        rho_(r | bit, c | bit) = mean - half_diff;
      }
    }
  }
}

double DensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix::min_eigenvalue() const {
  const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::vector<double> DensityMatrix::probabilities() const {
  std::vector<double> p(dimension());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    p[i] = std::max(0.0, rho_(idx, idx).real());
  }
  return p;
}

// --- Noise ----------------------------------------------------------------

std::string to_string(AmplificationMode mode) {
  switch (mode) {
    case AmplificationMode::FoldedCircuit: return "folded";
    case AmplificationMode::RateScaled: return "rate-scaled";
    case AmplificationMode::Perturbed: return "perturbed";
  }
  return "unknown";
}

AmplificationMode parse_amplification_mode(const std::string& name) {
  if (name == "folded" || name == "folded-circuit") return AmplificationMode::FoldedCircuit;
  if (name == "rate-scaled") return AmplificationMode::RateScaled;
  if (name == "perturbed") return AmplificationMode::Perturbed;
  throw std::invalid_argument("unknown amplification mode '" + name + "'");
}

void NoiseSpec::validate() const {
  if (!(f >= 0.0 && f < 1.0)) throw std::invalid_argument("depolarizing rate f must lie in [0, 1)");
  for (double t : spacing) {
    if (!(t > 0.0)) throw std::invalid_argument("implemented spacings must be positive");
  }
}

double NoiseSpec::effective_rate(double lambda) const {
  return mode == AmplificationMode::FoldedCircuit ? f : lambda * f;
}

DensityMatrix simulate_density(const Circuit& circuit, const NoiseSpec& noise, double lambda, int max_qubits) {
  noise.validate();
  if (circuit.width() > max_qubits) {
    throw std::invalid_argument("circuit width " + std::to_string(circuit.width()) + " exceeds simulator cap " +
                                std::to_string(max_qubits));
  }
  const double rate = noise.effective_rate(lambda);
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("effective depolarizing rate lambda*f must be < 1");

  DensityMatrix rho(circuit.width());
  for (const Gate& g : circuit.gates()) {
    rho.apply(g);
    if (g.kind == GateKind::CZ && rate > 0.0) {
      rho.apply_depolarizing(g.qubits[0], rate);
      rho.apply_depolarizing(g.qubits[1], rate);
    }
  }
  return rho;
}

double exact_expectation(const DensityMatrix& rho, const MeasurementGroup& group) {
  if (group.width != rho.qubits()) throw std::invalid_argument("measurement group width does not match state");
  DensityMatrix rotated = rho;
  for (const Gate& g : group.rotation) rotated.apply(g);
  const auto probs = rotated.probabilities();
  const auto& m = rotated.matrix();
  double total = 0.0;
  for (const PauliTerm& term : group.terms) {
    double value = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double diag = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
      value += (std::popcount(i & term.support) & 1) ? -diag : diag;
    }
    total += term.coefficient * value;
  }
  return total;
}

// --- Counts ---------------------------------------------------------------

std::uint64_t CountsTable::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0},
                         [](std::uint64_t acc, const auto& kv) { return acc + kv.second; });
}

CountsTable sample_counts(const DensityMatrix& rho, const MeasurementGroup& group, std::uint64_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("shot count must be positive");
  if (group.width != rho.qubits()) throw std::invalid_argument("measurement group width does not match state");
  DensityMatrix rotated = rho;
  for (const Gate& g : group.rotation) rotated.apply(g);
  const auto probs = rotated.probabilities();
  double remaining_mass = std::accumulate(probs.begin(), probs.end(), 0.0);

  CountsTable table;
  table.qubits = rho.qubits();
  table.shots = shots;
  std::uint64_t remaining = shots;
  for (std::size_t i = 0; i < probs.size() && remaining > 0; ++i) {
    std::uint64_t k;
    if (i + 1 == probs.size() || probs[i] >= remaining_mass) {
      k = remaining;
    } else {
      std::binomial_distribution<std::uint64_t> draw(remaining, std::clamp(probs[i] / remaining_mass, 0.0, 1.0));
      k = draw(rng);
    }
    remaining_mass -= probs[i];
    if (k > 0) {
      table.counts[i] = k;
      remaining -= k;
    }
  }
  return table;
}

double expectation_from_counts(const CountsTable& counts, const MeasurementGroup& group) {
  if (counts.shots == 0) throw std::invalid_argument("counts table has zero shots");
  if (group.width != counts.qubits) throw std::invalid_argument("measurement group width does not match counts");
  const double inv_shots = 1.0 / static_cast<double>(counts.shots);
  double total = 0.0;
  for (const PauliTerm& term : group.terms) {
    std::int64_t signed_sum = 0;
    for (const auto& [index, count] : counts.counts) {
      const auto c = static_cast<std::int64_t>(count);
      signed_sum += (std::popcount(index & term.support) & 1) ? -c : c;
    }
    total += term.coefficient * static_cast<double>(signed_sum) * inv_shots;
  }
  return total;
}

// --- Oracles --------------------------------------------------------------

double clifford_pauli_oracle(const Circuit& circuit, const MeasurementGroup& group, double f, double lambda) {
  if (group.width != circuit.width()) throw std::invalid_argument("measurement group width does not match circuit");
  if (!circuit.is_clifford()) throw std::invalid_argument("Pauli oracle requires an all-Clifford circuit");
  const double rate = lambda * f;
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("effective depolarizing rate lambda*f must be < 1");
  const double shrink = 1.0 - 4.0 * rate / 3.0;
  const auto n = static_cast<std::size_t>(circuit.width());

  double total = 0.0;
  for (const PauliTerm& term : group.terms) {
    PauliString p{std::vector<std::uint8_t>(n, 0), std::vector<std::uint8_t>(n, 0), term.coefficient};
    for (std::size_t q = 0; q < n; ++q) p.z[q] = (term.support >> q) & 1U;

    for (auto it = group.rotation.rbegin(); it != group.rotation.rend(); ++it) p.conjugate(*it);
    const auto gates = circuit.gates();
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
      if (it->kind == GateKind::CZ) {
        for (int q : it->qubits) {
          if (p.at(q) != Pauli::I) p.coefficient *= shrink;
        }
      }
      p.conjugate(*it);
    }
    // <0...0| P |0...0> vanishes unless P is diagonal.
    const bool diagonal = std::none_of(p.x.begin(), p.x.end(), [](std::uint8_t b) { return b != 0; });
    if (diagonal) total += p.coefficient;
  }
  return total;
}

double exact_ground_energy(const Topology& topology, double g) {
  topology.validate();
  if (topology.n > 12) throw std::invalid_argument("exact ground energy limited to 12 qubits");
  const Eigen::Index dim = Eigen::Index{1} << topology.n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    double diag = 0.0;
    for (auto [a, b] : topology.edges) {
      const bool za = (i >> a) & 1;
      const bool zb = (i >> b) & 1;
      diag -= (za == zb) ? 1.0 : -1.0;
    }
    h(i, i) = diag;
    for (int q = 0; q < topology.n; ++q) h(i ^ (Eigen::Index{1} << q), i) -= g;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace nre
