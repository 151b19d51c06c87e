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

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "qgrade/circuit.hpp"
#include "qgrade/qasm.hpp"

namespace qgrade {
namespace {

RingConfig ring(int L) {
  RingConfig c;
  c.L = L;
  return c;
}

std::string strip_headers(const std::string& text) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    const bool gate = line.starts_with("h ") || line.starts_with("x ") || line.starts_with("z ") ||
                      line.starts_with("rx(") || line.starts_with("rz(") || line.starts_with("cx ");
    if (gate) out += line + "\n";
  }
  return out;
}

Circuit random_circuit(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> width(2, 9);
  const int n = width(rng);
  Circuit c(n);
  std::uniform_int_distribution<int> kind(0, 5), qubit(0, n - 1), count(0, 40);
  std::uniform_real_distribution<double> angle(-20.0, 20.0);
  const int m = count(rng);
  for (int i = 0; i < m; ++i) {
    const int q = qubit(rng);
    switch (kind(rng)) {
      case 0: c.append(Gate::h(q)); break;
      case 1: c.append(Gate::x(q)); break;
      case 2: c.append(Gate::z(q)); break;
      case 3: c.append(Gate::rx(q, angle(rng))); break;
      case 4: c.append(Gate::rz(q, angle(rng) * 1e-7)); break;
      default: {
        int t = qubit(rng);
        if (t == q) t = (q + 1) % n;
        c.append(Gate::cnot(q, t));
      }
    }
  }
  return c;
}

TEST(Qasm, Version3Layout) {
  const std::string text = export_qasm(build_full_circuit(ring(4), 16.0, 6, true));
  EXPECT_TRUE(text.starts_with("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n"));
  EXPECT_NE(text.find("// qgrade: L=4 vison=1 t_max=16 n_steps=6"), std::string::npos);
  EXPECT_NE(text.find("qubit[4] q;\nbit[4] c;\n"), std::string::npos);
  EXPECT_NE(text.find("h q[0];\nz q[0];\ncx q[0], q[1];\n"), std::string::npos);
  EXPECT_TRUE(text.ends_with("c = measure q;\n"));
}

TEST(Qasm, Version2Layout) {
  const std::string text = export_qasm(build_full_circuit(ring(4), 16.0, 6, false), QasmVersion::V2);
  EXPECT_TRUE(text.starts_with("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n"));
  EXPECT_NE(text.find("qreg q[4];\ncreg c[4];\n"), std::string::npos);
  EXPECT_TRUE(text.ends_with("measure q -> c;\n"));
}

TEST(Qasm, VersionsShareGateSequence) {
  for (int L : {4, 8}) {
    const Circuit c = build_full_circuit(ring(L), 27.0, 10, true);
    const std::string v2 = export_qasm(c, QasmVersion::V2);
    const std::string v3 = export_qasm(c, QasmVersion::V3);
    EXPECT_NE(v2, v3);
    EXPECT_EQ(strip_headers(v2), strip_headers(v3));
    EXPECT_EQ(parse_qasm(v2), parse_qasm(v3));
  }
}

TEST(Qasm, BenchmarkCircuitsRoundTrip) {
  for (int L : {4, 6, 8, 12}) {
    for (bool vison : {false, true}) {
      const Circuit c = build_full_circuit(ring(L), 5.0 + 2.25 * L, L + 2, vison);
      for (auto v : {QasmVersion::V2, QasmVersion::V3}) {
        const Circuit back = parse_qasm(export_qasm(c, v));
        EXPECT_EQ(back, c);
        EXPECT_EQ(back.metadata(), c.metadata());
      }
    }
  }
}

TEST(Qasm, RandomCircuitsRoundTripExactly) {
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < 100; ++i) {
    const Circuit c = random_circuit(rng);
    for (auto v : {QasmVersion::V2, QasmVersion::V3}) {
      const Circuit back = parse_qasm(export_qasm(c, v));
      ASSERT_EQ(back, c) << "circuit " << i;
      ASSERT_EQ(export_qasm(back, v), export_qasm(c, v));
    }
  }
}

TEST(Qasm, AcceptsFreeSpacingAndComments) {
  const Circuit c = parse_qasm(
      "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n\n// a comment\nqreg r[2];\ncreg m[2];\n"
      "  h r[0];   // trailing\nrz( -1.5 ) r[1];\nCX r[0],r[1];\nmeasure r[0] -> m[0];\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.gates()[1], Gate::rz(1, -1.5));
  EXPECT_EQ(c.gates()[2], Gate::cnot(0, 1));
}

TEST(Qasm, MissingSemicolonReportsLine) {
  try {
    parse_qasm("OPENQASM 3.0;\nqubit[2] q;\nh q[0]\n");
    FAIL() << "expected a syntax error";
  } catch (const QasmSyntaxError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Qasm, MissingAngleReportsLine) {
  try {
    parse_qasm("OPENQASM 3.0;\nqubit[2] q;\nh q[0];\nrz q[1];\n");
    FAIL() << "expected a syntax error";
  } catch (const QasmSyntaxError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\nqubit[2] q;\nrz(pi/2) q[1];\n"), QasmSyntaxError);
}

TEST(Qasm, UnsupportedGateIsNamed) {
  try {
    parse_qasm("OPENQASM 3.0;\nqubit[3] q;\nccx q[0], q[1], q[2];\n");
    FAIL() << "expected an unsupported-gate error";
  } catch (const UnsupportedGateError& e) {
    EXPECT_EQ(e.gate(), "ccx");
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Qasm, StructuralErrors) {
  EXPECT_THROW(parse_qasm("qubit[2] q;\nh q[0];\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 4.0;\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\nqubit[2] q;\nh q[2];\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\nqubit[2] q;\ncx q[0], q[0];\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\nqubit[2] q;\nh(0.5) q[0];\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\nh q[0];\n"), QasmSyntaxError);
  EXPECT_THROW(parse_qasm("OPENQASM 3.0;\n// qgrade: L=4\nqubit[2] q;\n"), QasmSyntaxError);
}

}  // namespace
}  // namespace qgrade
