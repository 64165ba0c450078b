#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nre/simulator.hpp"

namespace nre {

std::string bitstring(std::uint64_t index, int qubits) {
  std::string bits(static_cast<std::size_t>(qubits), '0');
  for (int q = 0; q < qubits; ++q) {
    if ((index >> q) & 1U) bits[static_cast<std::size_t>(q)] = '1';
  }
  return bits;
}

std::uint64_t parse_bitstring(const std::string& bits) {
  if (bits.size() > 64) throw std::invalid_argument("bitstring longer than 64 qubits");
  std::uint64_t index = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      index |= std::uint64_t{1} << q;
    } else if (bits[q] != '0') {
      throw std::invalid_argument("bitstring '" + bits + "' contains a character other than 0/1");
    }
  }
  return index;
}

void write_counts(std::ostream& out, const CountsTable& table) {
  char lambda[40];
  std::snprintf(lambda, sizeof lambda, "%.17g", table.lambda);
  out << "shots " << table.shots << " qubits " << table.qubits << " circuit " << table.circuit << " group "
      << table.group << " lambda " << lambda << '\n';
  for (const auto& [index, count] : table.counts) out << bitstring(index, table.qubits) << ' ' << count << '\n';
}

CountsTable read_counts(std::istream& in) {
  std::string line;
  CountsTable table;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    fields.imbue(std::locale::classic());
    if (!have_header) {
      std::string k_shots, k_qubits, k_circuit, k_group, k_lambda;
      if (!(fields >> k_shots >> table.shots >> k_qubits >> table.qubits >> k_circuit >> table.circuit >> k_group >>
            table.group >> k_lambda >> table.lambda) ||
          k_shots != "shots" || k_qubits != "qubits" || k_circuit != "circuit" || k_group != "group" ||
          k_lambda != "lambda") {
        throw std::invalid_argument("counts header must be 'shots <S> qubits <n> circuit <label> group <id> lambda <value>'");
      }
      if (table.qubits < 1 || table.qubits > 64) throw std::invalid_argument("counts qubit count out of range");
      have_header = true;
      continue;
    }
    std::string bits;
    std::uint64_t count = 0;
    if (!(fields >> bits >> count)) {
      throw std::invalid_argument("counts line " + std::to_string(line_no) + " must be '<bitstring> <count>'");
    }
    if (bits.size() != static_cast<std::size_t>(table.qubits)) {
      throw std::invalid_argument("counts line " + std::to_string(line_no) + ": bitstring width mismatch");
    }
    if (count > 0) table.counts[parse_bitstring(bits)] += count;
  }
  if (!have_header) throw std::invalid_argument("counts file has no header");
  if (table.total() != table.shots) {
    throw std::invalid_argument("counts sum " + std::to_string(table.total()) + " differs from declared shots " +
                                std::to_string(table.shots));
  }
  return table;
}

}  // namespace nre
