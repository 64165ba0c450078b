#include "nre/circuit.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nre {

namespace {

std::string format_angle(double theta) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", theta);
  return buf;
}

[[noreturn]] void parse_error(std::size_t line_no, const std::string& what) {
  throw std::invalid_argument("circuit line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

void write_circuit(std::ostream& out, const Circuit& circuit) {
  out << "qubits " << circuit.width() << " label " << circuit.label() << '\n';
  for (const Gate& g : circuit.gates()) {
    if (g.kind == GateKind::CZ) {
      out << "CZ " << g.qubits[0] << ' ' << g.qubits[1] << '\n';
    } else {
      out << "R " << axis_name(g.axis) << ' ' << format_angle(g.angle) << ' ' << g.qubits[0] << '\n';
    }
  }
}

Circuit read_circuit(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Circuit circuit;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    std::string tag;
    fields >> tag;
    if (!have_header) {
      int width = 0;
      std::string label_tag;
      if (tag != "qubits" || !(fields >> width >> label_tag) || label_tag != "label") {
        parse_error(line_no, "expected header 'qubits <n> label <text>'");
      }
      std::string label;
      std::getline(fields >> std::ws, label);
      circuit = Circuit(width, label);
      have_header = true;
      continue;
    }
    try {
      if (tag == "CZ") {
        int a = 0, b = 0;
        if (!(fields >> a >> b)) parse_error(line_no, "malformed CZ");
        circuit.cz(a, b);
      } else if (tag == "R") {
        std::string axis;
        double theta = 0;
        int q = 0;
        if (!(fields >> axis >> theta >> q) || axis.size() != 1) parse_error(line_no, "malformed rotation");
        circuit.add(Gate::rotation(parse_axis(axis[0]), theta, q));
      } else {
        parse_error(line_no, "unknown gate '" + tag + "'");
      }
    } catch (const std::invalid_argument& e) {
      if (std::string_view(e.what()).starts_with("circuit line")) throw;
      parse_error(line_no, e.what());
    }
  }
  if (!have_header) throw std::invalid_argument("circuit text has no header");
  return circuit;
}

}  // namespace nre
