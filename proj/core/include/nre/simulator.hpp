#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nre/circuit.hpp"
#include "nre/rng.hpp"

namespace nre {

inline constexpr int kDefaultMaxQubits = 10;

/// Dense 2^n x 2^n density matrix. Basis index bit q is the state of qubit q.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// |0...0><0...0|
  explicit DensityMatrix(int n);

  int qubits() const { return n_; }
  std::size_t dimension() const { return static_cast<std::size_t>(rho_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return rho_; }
  Eigen::MatrixXcd& matrix() { return rho_; }

  static DensityMatrix from_matrix(Eigen::MatrixXcd rho);
  static DensityMatrix maximally_mixed(int n);

  void apply(const Gate& gate);
  void apply_rotation(Axis axis, double theta, int q);
  void apply_cz(int a, int b);
  /// rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z) on qubit q, which
  /// scales every Pauli component acting nontrivially on q by 1 - 4p/3.
  void apply_depolarizing(int q, double p);

  std::complex<double> trace() const { return rho_.trace(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Diagonal in the computational basis, with round-off negatives clamped.
  std::vector<double> probabilities() const;

 private:
  int n_ = 0;
  Eigen::MatrixXcd rho_;
};

enum class AmplificationMode { FoldedCircuit, RateScaled, Perturbed };

std::string to_string(AmplificationMode mode);
AmplificationMode parse_amplification_mode(const std::string& name);

struct NoiseSpec {
  /// Depolarizing probability per participating qubit per CZ.
  double f = 0.0;
  AmplificationMode mode = AmplificationMode::RateScaled;
  /// Implemented noise-level spacings (perturbed mode only).
  std::vector<double> spacing;

  /// Throws std::invalid_argument when f is outside [0, 1) or a spacing is not positive.
  void validate() const;
  /// Per-CZ rate at scale factor lambda: f for folded circuits, lambda*f otherwise.
  double effective_rate(double lambda) const;
};

/// Runs the circuit from |0...0>; after every CZ both participants are
/// depolarized at the effective rate. Single-qubit gates are noiseless.
DensityMatrix simulate_density(const Circuit& circuit, const NoiseSpec& noise, double lambda,
                               int max_qubits = kDefaultMaxQubits);

/// sum_terms coefficient * tr(U rho U^dagger Z_support) with U the group rotation.
double exact_expectation(const DensityMatrix& rho, const MeasurementGroup& group);

struct CountsTable {
  int qubits = 0;
  std::uint64_t shots = 0;
  /// Basis index -> count; zero counts are not stored.
  std::map<std::uint64_t, std::uint64_t> counts;

  std::string circuit;
  int group = 0;
  double lambda = 1.0;

  /// Sum of counts; equals `shots` for every well-formed table.
  std::uint64_t total() const;
};

/// Multinomial sample of `shots` outcomes in the rotated basis.
CountsTable sample_counts(const DensityMatrix& rho, const MeasurementGroup& group, std::uint64_t shots, Rng& rng);

/// sum_terms coefficient * (1/S) sum_b count(b) * (-1)^{popcount(b & support)}.
double expectation_from_counts(const CountsTable& counts, const MeasurementGroup& group);

/// Exact noisy expectation of an all-Clifford circuit under rate-scaled local
/// depolarizing noise, by propagating each Z-string backward as a Pauli.
/// Independent of the dense simulator.
double clifford_pauli_oracle(const Circuit& circuit, const MeasurementGroup& group, double f, double lambda);

/// Smallest eigenvalue of H = -g sum X_j - sum_<ij> Z_i Z_j.
double exact_ground_energy(const Topology& topology, double g);

// Counts text format: "shots <S> qubits <n> circuit <label> group <id> lambda <value>"
// followed by "<bitstring> <count>" lines; character q of a bitstring is qubit q.
void write_counts(std::ostream& out, const CountsTable& table);
CountsTable read_counts(std::istream& in);

std::string bitstring(std::uint64_t index, int qubits);
std::uint64_t parse_bitstring(const std::string& bits);

}  // namespace nre
