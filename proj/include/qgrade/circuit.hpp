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

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgrade/errors.hpp"
#include "qgrade/ring_model.hpp"

namespace qgrade {

enum class GateKind { H, X, Z, RX, RZ, CNOT };

constexpr std::string_view gate_name(GateKind k) noexcept {
  switch (k) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::Z: return "z";
    case GateKind::RX: return "rx";
    case GateKind::RZ: return "rz";
    case GateKind::CNOT: return "cx";
  }
  return "?";
}

constexpr bool is_rotation(GateKind k) noexcept { return k == GateKind::RX || k == GateKind::RZ; }

/// One gate. `target` is unused (-1) except for CNOT; `theta` is in radians
/// and only meaningful for rotations.
struct Gate {
  GateKind kind = GateKind::H;
  int qubit = 0;
  int target = -1;
  double theta = 0.0;

  static Gate h(int q) { return {GateKind::H, q}; }
  static Gate x(int q) { return {GateKind::X, q}; }
  static Gate z(int q) { return {GateKind::Z, q}; }
  static Gate rx(int q, double theta) { return {GateKind::RX, q, -1, theta}; }
  static Gate rz(int q, double theta) { return {GateKind::RZ, q, -1, theta}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, control, target}; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct CircuitMetadata {
  int L = 0;
  bool with_vison = false;
  double t_max = 0.0;
  int n_steps = 0;
  double theta_z = 0.0;
  double theta_x = 0.0;

  friend bool operator==(const CircuitMetadata&, const CircuitMetadata&) = default;
};

class Circuit {
 public:
  explicit Circuit(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1) throw InputError("circuit needs at least one qubit");
  }

  int num_qubits() const noexcept { return num_qubits_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }
  bool empty() const noexcept { return gates_.empty(); }

  const std::optional<CircuitMetadata>& metadata() const noexcept { return metadata_; }
  void set_metadata(CircuitMetadata m) { metadata_ = m; }

  void append(const Gate& g) {
    check(g);
    gates_.push_back(g);
  }

  void append(const Circuit& other) {
    if (other.num_qubits_ != num_qubits_) throw InputError("cannot concatenate circuits of different width");
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
  }

  std::size_t count(GateKind k) const noexcept {
    std::size_t n = 0;
    for (const auto& g : gates_) n += g.kind == k;
    return n;
  }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  void check(const Gate& g) const {
    auto in_range = [&](int q) { return q >= 0 && q < num_qubits_; };
    if (!in_range(g.qubit)) throw InputError("gate qubit " + std::to_string(g.qubit) + " out of range");
    if (g.kind == GateKind::CNOT) {
      if (!in_range(g.target)) throw InputError("CNOT target " + std::to_string(g.target) + " out of range");
      if (g.target == g.qubit) throw InputError("CNOT control equals target");
    }
    if (is_rotation(g.kind) && !std::isfinite(g.theta)) throw InputError("rotation angle must be finite");
  }

  int num_qubits_;
  std::vector<Gate> gates_;
  std::optional<CircuitMetadata> metadata_;
};

namespace detail {
inline void check_circuit_ring(int L) {
  if (L < 4 || L % 2 != 0) {
    throw InputError("benchmark circuits need an even ring with L >= 4, got L = " + std::to_string(L));
  }
}
}  // namespace detail

/// Rotation angles of one Trotter step of length t_max / n_steps.
struct TrotterAngles {
  double theta_z;
  double theta_x;
};

inline TrotterAngles trotter_angles(const RingConfig& config, double t_max, int n_steps) {
  if (n_steps < 1) throw InputError("number of Trotter steps must be >= 1");
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw InputError("t_max must be finite and non-negative");
  return {2.0 * config.J * t_max / n_steps, 2.0 * config.Gamma * t_max / n_steps};
}

/// GHZ preparation: H(0), optional Z(0) to thread a vison, then the CNOT chain
/// 0->1->...->L-1. Produces (|0..0> +- |1..1>)/sqrt(2) with <B> = +-1.
inline Circuit build_ghz_prep(int L, bool with_vison) {
  detail::check_circuit_ring(L);
  Circuit c(L);
  c.append(Gate::h(0));
  if (with_vison) c.append(Gate::z(0));
  for (int i = 0; i + 1 < L; ++i) c.append(Gate::cnot(i, i + 1));
  return c;
}

/// One Trotter step: CNOT-RZ-CNOT on even bonds, then odd bonds (bond L-1
/// wraps onto qubit 0), then RX on every qubit. The twisted bond gets -theta_z.
inline Circuit build_trotter_step(const RingConfig& config, double t_max, int n_steps) {
  config.validate();
  detail::check_circuit_ring(config.L);
  const auto [theta_z, theta_x] = trotter_angles(config, t_max, n_steps);
  const int L = config.L;
  Circuit c(L);
  for (int parity = 0; parity < 2; ++parity) {
    for (int s = parity; s < L; s += 2) {
      const int a = bonds::left_qubit(s, L);
      const int b = bonds::right_qubit(s, L);
      c.append(Gate::cnot(a, b));
      c.append(Gate::rz(b, bonds::sign(s) * theta_z));
      c.append(Gate::cnot(a, b));
    }
  }
  for (int q = 0; q < L; ++q) c.append(Gate::rx(q, theta_x));
  return c;
}

inline Circuit build_full_circuit(const RingConfig& config, double t_max, int n_steps, bool with_vison) {
  Circuit c = build_ghz_prep(config.L, with_vison);
  const Circuit step = build_trotter_step(config, t_max, n_steps);
  for (int k = 0; k < n_steps; ++k) c.append(step);
  const auto angles = trotter_angles(config, t_max, n_steps);
  c.set_metadata({config.L, with_vison, t_max, n_steps, angles.theta_z, angles.theta_x});
  return c;
}

inline std::string qasm_file_name(int L, int n_steps, bool with_vison) {
  return "qgrade_L" + std::to_string(L) + "_N" + std::to_string(n_steps) + "_" +
         (with_vison ? "vison" : "novison") + ".qasm";
}

}  // namespace qgrade
