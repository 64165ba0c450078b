#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nre {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Axis : std::uint8_t { X, Y, Z };
enum class GateKind : std::uint8_t { CZ, Rotation };

char axis_name(Axis axis);
Axis parse_axis(char c);

/// Wraps an angle into [0, 2*pi). Values within 1e-12 of a multiple of pi/2
/// snap onto it so Clifford angles compare exactly.
double normalize_angle(double theta);

/// A gate from the {CZ, single-qubit rotation} set.
///
/// Rotations are R_axis(theta) = exp(-i theta sigma_axis / 2) with theta kept
/// in [0, 2*pi). For CZ, `qubits` holds both participants; rotations only use
/// `qubits[0]`.
struct Gate {
  GateKind kind = GateKind::Rotation;
  Axis axis = Axis::Z;
  double angle = 0.0;
  std::array<int, 2> qubits{0, 0};

  static Gate cz(int a, int b);
  static Gate rotation(Axis axis, double theta, int qubit);

  bool is_two_qubit() const { return kind == GateKind::CZ; }
  bool is_clifford() const;
  /// The inverse gate, again expressed with an angle in [0, 2*pi).
  Gate inverse() const;

  friend bool operator==(const Gate&, const Gate&) = default;
};

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int width, std::string label = {});

  int width() const { return width_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  std::span<const Gate> gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  /// Appends after checking qubit bounds; throws std::invalid_argument.
  void add(const Gate& gate);
  void append(const Circuit& other);

  void cz(int a, int b) { add(Gate::cz(a, b)); }
  void rx(double theta, int q) { add(Gate::rotation(Axis::X, theta, q)); }
  void ry(double theta, int q) { add(Gate::rotation(Axis::Y, theta, q)); }
  void rz(double theta, int q) { add(Gate::rotation(Axis::Z, theta, q)); }

  /// G^dagger: reversed gate list of inverses.
  Circuit inverse() const;

  bool is_clifford() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  int width_ = 0;
  std::string label_;
  std::vector<Gate> gates_;
};

struct Topology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  /// Central qubit 0 coupled to `outer` leaf qubits.
  static Topology star(int outer);
  /// Square grid with nearest-neighbour couplings, row-major numbering.
  static Topology grid(int rows, int cols);
  static Topology line(int n);

  /// Throws std::invalid_argument on self-loops or out-of-range qubits.
  void validate() const;
};

/// Parses "star-5", "grid-RxC" or "line-N".
Topology parse_topology(std::string_view name);

/// A weighted Z-string after basis rotation. Bit q of `support` selects qubit q.
struct PauliTerm {
  double coefficient = 0.0;
  std::uint64_t support = 0;
};

struct MeasurementGroup {
  int width = 0;
  std::vector<Gate> rotation;
  std::vector<PauliTerm> terms;
};

/// Measurement group for one Pauli string, e.g. "XIZY" (qubit 0 first).
MeasurementGroup pauli_string_group(std::string_view paulis, double coefficient = 1.0);

struct QaoaParameters {
  std::vector<double> gammas;
  std::vector<double> betas;
};

/// QAOA ansatz for H = -g sum_j X_j - sum_<ij> Z_i Z_j on the given topology.
///
/// Prepares |+>^n, then for each layer k applies exp(-i gamma_k H_ZZ) edge by
/// edge (two CZ per edge) followed by exp(-i beta_k H_X).
Circuit build_tfim_qaoa(const Topology& topology, double g, const QaoaParameters& params);

/// Z-basis group {-Z_i Z_j per edge} and X-basis group {-g X_q per qubit}.
std::array<MeasurementGroup, 2> tfim_measurement_groups(const Topology& topology, double g);

/// Clifford angle in {0, pi/2, pi, 3pi/2} closest to theta in Frobenius norm
/// of the rotation unitaries. Ties go to the smaller candidate.
double closest_clifford_angle(double theta);

/// Sum over rotations of ||R(theta) - R(closest_clifford_angle(theta))||_F.
double clifford_distance(const Circuit& circuit);

/// Replaces every rotation angle by its closest Clifford angle.
Circuit to_noise_canceling(const Circuit& circuit);

/// Global unitary folding G (G^dagger G)^k plus a partial fold of the
/// trailing gate block for non-odd scale factors.
Circuit fold_global(const Circuit& circuit, double scale);

struct GateCounts {
  std::size_t total = 0;
  std::size_t two_qubit = 0;
  std::size_t depth = 0;

  friend bool operator==(const GateCounts&, const GateCounts&) = default;
};

GateCounts gate_counts(const Circuit& circuit);

// Text format: header "qubits <n> label <text>", then one gate per line,
// "CZ q1 q2" or "R <axis> <theta> <q>".
void write_circuit(std::ostream& out, const Circuit& circuit);
Circuit read_circuit(std::istream& in);

}  // namespace nre
