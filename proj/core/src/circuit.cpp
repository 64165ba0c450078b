#include "nre/circuit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace nre {

namespace {

constexpr std::array<double, 4> kCliffordAngles{0.0, kPi / 2, kPi, 3 * kPi / 2};
constexpr double kCliffordSnap = 1e-12;

void check_qubit(int q, int width) {
  if (q < 0 || q >= width) {
    throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range for width " +
                                std::to_string(width));
  }
}

Eigen::Matrix2cd rotation_matrix(double theta) {
  // The Frobenius distance between two rotations about the same axis does not
  // depend on the axis, so X is used throughout.
  using namespace std::complex_literals;
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Eigen::Matrix2cd m;
  m << c, -1i * s, -1i * s, c;
  return m;
}

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected integer, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

char axis_name(Axis axis) {
  switch (axis) {
    case Axis::X: return 'X';
    case Axis::Y: return 'Y';
    case Axis::Z: return 'Z';
  }
  return '?';
}

Axis parse_axis(char c) {
  switch (c) {
    case 'X': case 'x': return Axis::X;
    case 'Y': case 'y': return Axis::Y;
    case 'Z': case 'z': return Axis::Z;
    default: throw std::invalid_argument(std::string("unknown rotation axis '") + c + "'");
  }
}

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("rotation angle must be finite");
  double wrapped = std::fmod(theta, kTwoPi);
  if (wrapped < 0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  // Snap round-off near multiples of pi/2 so Clifford angles compare exactly.
  for (double c : kCliffordAngles) {
    if (std::abs(wrapped - c) < kCliffordSnap) return c;
  }
  if (kTwoPi - wrapped < kCliffordSnap) return 0.0;
  return wrapped;
}

Gate Gate::cz(int a, int b) {
  if (a == b) throw std::invalid_argument("CZ qubits must be distinct");
  Gate g;
  g.kind = GateKind::CZ;
  g.qubits = {a, b};
  return g;
}

Gate Gate::rotation(Axis axis, double theta, int qubit) {
  Gate g;
  g.kind = GateKind::Rotation;
  g.axis = axis;
  g.angle = normalize_angle(theta);
  g.qubits = {qubit, qubit};
  return g;
}

bool Gate::is_clifford() const {
  if (kind == GateKind::CZ) return true;
  return std::find(kCliffordAngles.begin(), kCliffordAngles.end(), angle) != kCliffordAngles.end();
}

Gate Gate::inverse() const {
  if (kind == GateKind::CZ) return *this;
  Gate g = *this;
  g.angle = angle == 0.0 ? 0.0 : normalize_angle(kTwoPi - angle);
  return g;
}

Circuit::Circuit(int width, std::string label) : width_(width), label_(std::move(label)) {
  if (width < 0) throw std::invalid_argument("circuit width must be non-negative");
}

void Circuit::add(const Gate& gate) {
  check_qubit(gate.qubits[0], width_);
  if (gate.kind == GateKind::CZ) {
    check_qubit(gate.qubits[1], width_);
    if (gate.qubits[0] == gate.qubits[1]) throw std::invalid_argument("CZ qubits must be distinct");
    gates_.push_back(gate);
  } else {
    gates_.push_back(Gate::rotation(gate.axis, gate.angle, gate.qubits[0]));
  }
}

void Circuit::append(const Circuit& other) {
  if (other.width_ != width_) throw std::invalid_argument("cannot append circuits of different width");
  for (const auto& g : other.gates_) add(g);
}

Circuit Circuit::inverse() const {
  Circuit inv(width_, label_);
  inv.gates_.reserve(gates_.size());
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) inv.gates_.push_back(it->inverse());
  return inv;
}

bool Circuit::is_clifford() const {
  return std::all_of(gates_.begin(), gates_.end(), [](const Gate& g) { return g.is_clifford(); });
}

Topology Topology::star(int outer) {
  if (outer < 1) throw std::invalid_argument("star topology needs at least one outer qubit");
  Topology t;
  t.n = outer + 1;
  for (int q = 1; q <= outer; ++q) t.edges.emplace_back(0, q);
  return t;
}

Topology Topology::grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid dimensions must be positive");
  Topology t;
  t.n = rows * cols;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int q = r * cols + c;
      if (c + 1 < cols) t.edges.emplace_back(q, q + 1);
      if (r + 1 < rows) t.edges.emplace_back(q, q + cols);
    }
  }
  return t;
}

Topology Topology::line(int n) {
  if (n < 1) throw std::invalid_argument("line topology needs at least one qubit");
  Topology t;
  t.n = n;
  for (int q = 0; q + 1 < n; ++q) t.edges.emplace_back(q, q + 1);
  return t;
}

void Topology::validate() const {
  if (n < 1) throw std::invalid_argument("topology has no qubits");
  for (auto [a, b] : edges) {
    check_qubit(a, n);
    check_qubit(b, n);
    if (a == b) throw std::invalid_argument("topology edge is a self-loop");
  }
}

Topology parse_topology(std::string_view name) {
  auto dash = name.find('-');
  if (dash == std::string_view::npos) throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
  auto kind = name.substr(0, dash);
  auto rest = name.substr(dash + 1);
  if (kind == "star") {
    // star-N counts all qubits, centre included.
    return Topology::star(parse_int(rest) - 1);
  }
  if (kind == "line") return Topology::line(parse_int(rest));
  if (kind == "grid") {
    auto x = rest.find('x');
    if (x == std::string_view::npos) throw std::invalid_argument("grid topology must look like grid-RxC");
    return Topology::grid(parse_int(rest.substr(0, x)), parse_int(rest.substr(x + 1)));
  }
  throw std::invalid_argument("unknown topology '" + std::string(name) + "'");
}

MeasurementGroup pauli_string_group(std::string_view paulis, double coefficient) {
  MeasurementGroup group;
  group.width = static_cast<int>(paulis.size());
  std::uint64_t support = 0;
  for (int q = 0; q < group.width; ++q) {
    switch (paulis[q]) {
      case 'I': break;
      case 'Z': support |= std::uint64_t{1} << q; break;
      case 'X':
        group.rotation.push_back(Gate::rotation(Axis::Y, 3 * kPi / 2, q));
        support |= std::uint64_t{1} << q;
        break;
      case 'Y':
        group.rotation.push_back(Gate::rotation(Axis::X, kPi / 2, q));
        support |= std::uint64_t{1} << q;
        break;
      default: throw std::invalid_argument(std::string("unknown Pauli '") + paulis[q] + "'");
    }
  }
  group.terms.push_back({coefficient, support});
  return group;
}

Circuit build_tfim_qaoa(const Topology& topology, double g, const QaoaParameters& params) {
  topology.validate();
  if (topology.edges.empty()) throw std::invalid_argument("TFIM QAOA needs a topology with edges");
  const std::size_t layers = params.gammas.size();
  if (layers == 0) throw std::invalid_argument("QAOA needs at least one layer");
  if (params.betas.size() != layers) throw std::invalid_argument("gamma and beta vectors differ in length");

  Circuit c(topology.n, "tfim-qaoa");
  for (int q = 0; q < topology.n; ++q) c.ry(kPi / 2, q);

  for (std::size_t k = 0; k < layers; ++k) {
    // exp(+i gamma Z_a Z_b) = exp(-i phi/2 Z_a Z_b) with phi = -2 gamma.
    // The R_Y pair maps X_b to Z_b around CZ . R_X(phi)_b . CZ.
    const double phi = -2.0 * params.gammas[k];
    for (auto [a, b] : topology.edges) {
      c.ry(kPi / 2, b);
      c.cz(a, b);
      c.rx(phi, b);
      c.cz(a, b);
      c.ry(3 * kPi / 2, b);
    }
    // exp(+i beta g X_q) = R_X(-2 beta g).
    for (int q = 0; q < topology.n; ++q) c.rx(-2.0 * params.betas[k] * g, q);
  }
  return c;
}

std::array<MeasurementGroup, 2> tfim_measurement_groups(const Topology& topology, double g) {
  topology.validate();
  MeasurementGroup zz;
  zz.width = topology.n;
  for (auto [a, b] : topology.edges) {
    zz.terms.push_back({-1.0, (std::uint64_t{1} << a) | (std::uint64_t{1} << b)});
  }
  MeasurementGroup xs;
  xs.width = topology.n;
  for (int q = 0; q < topology.n; ++q) {
    xs.rotation.push_back(Gate::rotation(Axis::Y, 3 * kPi / 2, q));
    xs.terms.push_back({-g, std::uint64_t{1} << q});
  }
  return {std::move(zz), std::move(xs)};
}

double closest_clifford_angle(double theta) {
  const Eigen::Matrix2cd target = rotation_matrix(theta);
  double best_angle = kCliffordAngles[0];
  double best_distance = (target - rotation_matrix(best_angle)).norm();
  for (std::size_t i = 1; i < kCliffordAngles.size(); ++i) {
    const double d = (target - rotation_matrix(kCliffordAngles[i])).norm();
    if (d < best_distance - 1e-12) {
      best_distance = d;
      best_angle = kCliffordAngles[i];
    }
  }
  return best_angle;
}

double clifford_distance(const Circuit& circuit) {
  double total = 0.0;
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::Rotation) {
      total += (rotation_matrix(g.angle) - rotation_matrix(closest_clifford_angle(g.angle))).norm();
    }
  }
  return total;
}

Circuit to_noise_canceling(const Circuit& circuit) {
  Circuit ncc(circuit.width(), circuit.label() + "-ncc");
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::Rotation) {
      ncc.add(Gate::rotation(g.axis, closest_clifford_angle(g.angle), g.qubits[0]));
    } else {
      ncc.add(g);
    }
  }
  return ncc;
}

Circuit fold_global(const Circuit& circuit, double scale) {
  if (!(scale >= 1.0)) throw std::invalid_argument("folding scale factor must be >= 1");
  const auto k = static_cast<std::size_t>(std::floor((scale - 1.0) / 2.0));
  const double remainder = scale - static_cast<double>(2 * k + 1);
  const std::size_t n = circuit.size();
  const auto partial = std::min(n, static_cast<std::size_t>(std::llround(remainder * static_cast<double>(n) / 2.0)));

  const Circuit inverse = circuit.inverse();
  Circuit folded(circuit.width(), circuit.label());
  folded.append(circuit);
  for (std::size_t i = 0; i < k; ++i) {
    folded.append(inverse);
    folded.append(circuit);
  }
  if (partial > 0) {
    auto gates = circuit.gates();
    auto tail = gates.subspan(n - partial);
    for (auto it = tail.rbegin(); it != tail.rend(); ++it) folded.add(it->inverse());
    for (const Gate& g : tail) folded.add(g);
  }
  return folded;
}

GateCounts gate_counts(const Circuit& circuit) {
  GateCounts counts;
  std::vector<std::size_t> level(static_cast<std::size_t>(circuit.width()), 0);
  for (const Gate& g : circuit.gates()) {
    ++counts.total;
    std::size_t layer;
    if (g.kind == GateKind::CZ) {
      ++counts.two_qubit;
      auto& a = level[static_cast<std::size_t>(g.qubits[0])];
      auto& b = level[static_cast<std::size_t>(g.qubits[1])];
      layer = std::max(a, b) + 1;
      a = b = layer;
    } else {
      layer = ++level[static_cast<std::size_t>(g.qubits[0])];
    }
    counts.depth = std::max(counts.depth, layer);
  }
  return counts;
}

}  // namespace nre
