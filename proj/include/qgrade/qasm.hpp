// Copyright 2026 The qgrade Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "qgrade/circuit.hpp"
#include "qgrade/errors.hpp"
#include "qgrade/format.hpp"

namespace qgrade {

enum class QasmVersion { V2 = 2, V3 = 3 };

/// OpenQASM text using h, x, z, rx, rz, cx and a terminal full-register
/// measurement (qubit i -> bit i). Angles are written unreduced. Circuit
/// metadata, when present, travels in a leading `// qgrade:` comment.
inline std::string export_qasm(const Circuit& circuit, QasmVersion version = QasmVersion::V3) {
  std::ostringstream out;
  const int n = circuit.num_qubits();
  if (version == QasmVersion::V3) {
    out << "OPENQASM 3.0;\ninclude \"stdgates.inc\";\n";
  } else {
    out << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  }
  if (const auto& m = circuit.metadata()) {
    out << "// qgrade: L=" << m->L << " vison=" << (m->with_vison ? 1 : 0) << " t_max=" << format_double(m->t_max)
        << " n_steps=" << m->n_steps << " theta_z=" << format_double(m->theta_z)
        << " theta_x=" << format_double(m->theta_x) << "\n";
  }
  if (version == QasmVersion::V3) {
    out << "qubit[" << n << "] q;\nbit[" << n << "] c;\n";
  } else {
    out << "qreg q[" << n << "];\ncreg c[" << n << "];\n";
  }
  for (const Gate& g : circuit.gates()) {
    out << gate_name(g.kind);
    if (is_rotation(g.kind)) out << '(' << format_double(g.theta) << ')';
    out << " q[" << g.qubit << ']';
    if (g.kind == GateKind::CNOT) out << ", q[" << g.target << ']';
    out << ";\n";
  }
  if (version == QasmVersion::V3) {
    out << "c = measure q;\n";
  } else {
    out << "measure q -> c;\n";
  }
  return out.str();
}

namespace detail {

class QasmLineParser {
 public:
  QasmLineParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= s_.size();
  }
  bool peek(char c) {
    skip_space();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool consume(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c, const char* what) {
    if (!consume(c)) fail(std::string("expected '") + c + "' " + what);
  }
  bool consume_word(std::string_view w) {
    skip_space();
    if (s_.substr(pos_, w.size()) != w) return false;
    const std::size_t after = pos_ + w.size();
    if (after < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[after])) || s_[after] == '_')) return false;
    pos_ = after;
    return true;
  }
  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }
  long integer() {
    skip_space();
    long v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected integer");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  double number() {
    skip_space();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{}) fail("expected numeric angle");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }
  std::string_view rest() {
    skip_space();
    return s_.substr(pos_);
  }
  [[noreturn]] void fail(const std::string& what) const { throw QasmSyntaxError(line_, what); }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

inline std::string_view trim(std::string_view v) {
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
  return v;
}

inline std::optional<CircuitMetadata> parse_metadata_comment(std::string_view body, std::size_t line) {
  std::istringstream in{std::string(body)};
  CircuitMetadata m;
  std::string item;
  int seen = 0;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw QasmSyntaxError(line, "bad metadata item '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
    if (ec != std::errc{} || ptr != val.data() + val.size()) {
      throw QasmSyntaxError(line, "bad metadata value for '" + key + "'");
    }
    if (key == "L") m.L = static_cast<int>(d);
    else if (key == "vison") m.with_vison = d != 0.0;
    else if (key == "t_max") m.t_max = d;
    else if (key == "n_steps") m.n_steps = static_cast<int>(d);
    else if (key == "theta_z") m.theta_z = d;
    else if (key == "theta_x") m.theta_x = d;
    else throw QasmSyntaxError(line, "unknown metadata key '" + key + "'");
    ++seen;
  }
  if (seen != 6) throw QasmSyntaxError(line, "incomplete metadata comment");
  return m;
}

}  // namespace detail

/// Parses the restricted OpenQASM 2/3 dialect written by export_qasm: one
/// statement per line, numeric angle literals, a single quantum register.
inline Circuit parse_qasm(std::string_view text) {
  std::optional<Circuit> circuit;
  std::optional<CircuitMetadata> metadata;
  std::string qreg;
  std::string creg;
  int version = 0;
  std::size_t line_no = 0;

  auto qubit_operand = [&](detail::QasmLineParser& p) -> int {
    const std::string reg = p.identifier();
    if (!circuit || reg != qreg) p.fail("unknown quantum register '" + reg + "'");
    p.expect('[', "after register name");
    const long idx = p.integer();
    p.expect(']', "after qubit index");
    if (idx < 0 || idx >= circuit->num_qubits()) p.fail("qubit index " + std::to_string(idx) + " out of range");
    return static_cast<int>(idx);
  };

  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    start = end + 1;
    ++line_no;

    std::string_view line = detail::trim(raw);
    if (const auto c = line.find("//"); c != std::string_view::npos) {
      const std::string_view comment = detail::trim(line.substr(c + 2));
      if (comment.starts_with("qgrade:")) metadata = detail::parse_metadata_comment(comment.substr(7), line_no);
      line = detail::trim(line.substr(0, c));
    }
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (line.back() != ';') throw QasmSyntaxError(line_no, "missing ';'");
    line.remove_suffix(1);
    detail::QasmLineParser p(line, line_no);

    if (p.consume_word("OPENQASM")) {
      const double v = p.number();
      if (v == 2.0) version = 2;
      else if (v == 3.0) version = 3;
      else p.fail("unsupported OpenQASM version");
    } else if (p.consume_word("include")) {
      const auto r = p.rest();
      if (r.size() < 2 || r.front() != '"' || r.back() != '"') p.fail("expected quoted include path");
      continue;
    } else if (p.consume_word("qreg")) {
      if (circuit) p.fail("only one quantum register is supported");
      qreg = p.identifier();
      p.expect('[', "in register declaration");
      const long n = p.integer();
      p.expect(']', "in register declaration");
      if (n < 1) p.fail("register size must be positive");
      circuit.emplace(static_cast<int>(n));
    } else if (p.consume_word("qubit")) {
      if (circuit) p.fail("only one quantum register is supported");
      p.expect('[', "in register declaration");
      const long n = p.integer();
      p.expect(']', "in register declaration");
      if (n < 1) p.fail("register size must be positive");
      qreg = p.identifier();
      circuit.emplace(static_cast<int>(n));
    } else if (p.consume_word("creg")) {
      creg = p.identifier();
      p.expect('[', "in register declaration");
      p.integer();
      p.expect(']', "in register declaration");
    } else if (p.consume_word("bit")) {
      p.expect('[', "in register declaration");
      p.integer();
      p.expect(']', "in register declaration");
      creg = p.identifier();
    } else if (p.consume_word("measure")) {
      // OpenQASM 2 form: measure q -> c;  or  measure q[i] -> c[i];
      const std::string reg = p.identifier();
      if (!circuit || reg != qreg) p.fail("measure of unknown register '" + reg + "'");
      if (p.consume('[')) {
        p.integer();
        p.expect(']', "after qubit index");
      }
      if (!p.consume('-') || !p.consume('>')) p.fail("expected '->' in measure");
      if (p.identifier() != creg) p.fail("measure into unknown classical register");
      if (p.consume('[')) {
        p.integer();
        p.expect(']', "after bit index");
      }
    } else {
      const std::string name = p.identifier();
      if (name == creg && p.consume('=')) {
        // OpenQASM 3 form: c = measure q;
        if (!p.consume_word("measure")) p.fail("expected 'measure'");
        if (p.identifier() != qreg) p.fail("measure of unknown register");
      } else {
        GateKind kind;
        if (name == "h") kind = GateKind::H;
        else if (name == "x") kind = GateKind::X;
        else if (name == "z") kind = GateKind::Z;
        else if (name == "rx") kind = GateKind::RX;
        else if (name == "rz") kind = GateKind::RZ;
        else if (name == "cx" || name == "CX") kind = GateKind::CNOT;
        else throw UnsupportedGateError(line_no, name);
        if (!circuit) p.fail("gate before qubit declaration");
        Gate g{kind, 0, -1, 0.0};
        if (is_rotation(kind)) {
          p.expect('(', "before rotation angle");
          g.theta = p.number();
          p.expect(')', "after rotation angle");
        } else if (p.peek('(')) {
          p.fail("gate '" + name + "' takes no parameter");
        }
        g.qubit = qubit_operand(p);
        if (kind == GateKind::CNOT) {
          p.expect(',', "between CNOT operands");
          g.target = qubit_operand(p);
        }
        try {
          circuit->append(g);
        } catch (const InputError& e) {
          p.fail(e.what());
        }
      }
    }
    if (!p.done()) p.fail("unexpected trailing text '" + std::string(p.rest()) + "'");
    if (end == text.size()) break;
  }
  if (version == 0) throw QasmSyntaxError(1, "missing OPENQASM header");
  if (!circuit) throw QasmSyntaxError(line_no, "no quantum register declared");
  if (metadata) circuit->set_metadata(*metadata);
  return std::move(*circuit);
}

}  // namespace qgrade
