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

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgrade/circuit.hpp"
#include "qgrade/errors.hpp"
#include "qgrade/ring_model.hpp"
#include "qgrade/state.hpp"

namespace qgrade {

// ---------------------------------------------------------------------------
// Randomness

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for job `stream` under `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix64(base ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) with 53 random bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------------------
// Gates

namespace kernels {

template <typename F>
inline void for_each_pair(std::span<amplitude> a, int q, F&& f) {
  const std::size_t stride = std::size_t{1} << q;
  for (std::size_t base = 0; base < a.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) f(a[i], a[i + stride]);
  }
}

inline void rx(std::span<amplitude> a, int q, double theta) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  // Spelled out in reals: complex operator* goes through the slow
  // inf/nan-safe path without -ffast-math.
  for_each_pair(a, q, [c, s](amplitude& a0, amplitude& a1) {
    const double r0 = a0.real(), i0 = a0.imag(), r1 = a1.real(), i1 = a1.imag();
    a0 = {c * r0 + s * i1, c * i0 - s * r1};
    a1 = {c * r1 + s * i0, c * i1 - s * r0};
  });
}

}  // namespace kernels

/// Applies `gate` to an n-qubit amplitude array in place.
/// RX(t) = exp(-i t X/2), RZ(t) = exp(-i t Z/2).
inline void apply_gate(std::span<amplitude> a, int n, const Gate& gate) {
  auto check = [n](int q) {
    if (q < 0 || q >= n) throw InputError("gate qubit " + std::to_string(q) + " out of range");
  };
  check(gate.qubit);
  switch (gate.kind) {
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      kernels::for_each_pair(a, gate.qubit, [r](amplitude& a0, amplitude& a1) {
        const amplitude t0 = a0;
        a0 = r * (t0 + a1);
        a1 = r * (t0 - a1);
      });
      break;
    }
    case GateKind::X:
      kernels::for_each_pair(a, gate.qubit, [](amplitude& a0, amplitude& a1) { std::swap(a0, a1); });
      break;
    case GateKind::Z:
      kernels::for_each_pair(a, gate.qubit, [](amplitude&, amplitude& a1) { a1 = -a1; });
      break;
    case GateKind::RX:
      kernels::rx(a, gate.qubit, gate.theta);
      break;
    case GateKind::RZ: {
      const amplitude p0 = std::polar(1.0, -0.5 * gate.theta);
      const amplitude p1 = std::polar(1.0, 0.5 * gate.theta);
      kernels::for_each_pair(a, gate.qubit, [&](amplitude& a0, amplitude& a1) {
        a0 *= p0;
        a1 *= p1;
      });
      break;
    }
    case GateKind::CNOT: {
      check(gate.target);
      if (gate.target == gate.qubit) throw InputError("CNOT control equals target");
      const std::size_t cmask = std::size_t{1} << gate.qubit;
      const std::size_t tmask = std::size_t{1} << gate.target;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) std::swap(a[i], a[i | tmask]);
      }
      break;
    }
  }
}

inline void apply_gate(StateVector& psi, const Gate& gate) { apply_gate(psi.amplitudes(), psi.num_qubits(), gate); }

inline StateVector run_circuit(const Circuit& circuit, StateVector psi) {
  if (psi.num_qubits() != circuit.num_qubits()) {
    throw InputError("circuit has " + std::to_string(circuit.num_qubits()) + " qubits, state has " +
                     std::to_string(psi.num_qubits()));
  }
  for (const Gate& g : circuit.gates()) apply_gate(psi, g);
  return psi;
}

inline StateVector run_circuit(const Circuit& circuit) { return run_circuit(circuit, StateVector(circuit.num_qubits())); }

/// One benchmark Trotter step with the ZZ layers collapsed into a diagonal
/// phase. Equivalent to run_circuit(build_trotter_step(...)) gate by gate:
/// the ZZ blocks contribute exp(-i theta_z/2 * sum_s J_s z_s z_{s+1}), which
/// only depends on the spinon count of the basis state.
class TrotterStepKernel {
 public:
  TrotterStepKernel(const RingConfig& config, double t_max, int n_steps)
      : L_(config.L), angles_(trotter_angles(config, t_max, n_steps)), phase_by_count_(config.L + 1) {
    config.validate();
    for (int k = 0; k <= L_; ++k) phase_by_count_[k] = std::polar(1.0, -0.5 * angles_.theta_z * (L_ - 2 * k));
  }

  int num_qubits() const noexcept { return L_; }
  const TrotterAngles& angles() const noexcept { return angles_; }

  /// Phase of the ZZ layers on basis state `b`.
  amplitude zz_phase(std::uint64_t b) const noexcept {
    return phase_by_count_[std::popcount(bonds::occupation_mask(b, L_))];
  }

  void apply(StateVector& psi) const {
    detail::check_dimension(psi.num_qubits(), L_);
    auto a = psi.amplitudes();
    // Phase and low-qubit rotations run block by block while the block sits
    // in cache; per-amplitude arithmetic order is the same as gate by gate.
    const int low = std::min(L_, kBlockQubits);
    const std::size_t block = std::size_t{1} << low;
    for (std::size_t base = 0; base < a.size(); base += block) {
      auto sub = a.subspan(base, block);
      for (std::size_t i = 0; i < block; ++i) {
        const amplitude p = zz_phase(base + i);
        const double re = sub[i].real(), im = sub[i].imag();
        sub[i] = {re * p.real() - im * p.imag(), re * p.imag() + im * p.real()};
      }
      for (int q = 0; q < low; ++q) kernels::rx(sub, q, angles_.theta_x);
    }
    for (int q = low; q < L_; ++q) kernels::rx(a, q, angles_.theta_x);
  }

 private:
  static constexpr int kBlockQubits = 12;

  int L_;
  TrotterAngles angles_;
  std::vector<amplitude> phase_by_count_;
};

// ---------------------------------------------------------------------------
// Exact evolution

/// e^{-iHt} for the ring Hamiltonian. Dense eigendecomposition up to
/// kDenseMaxQubits, Lanczos propagation above.
class ExactPropagator {
 public:
  static constexpr int kDenseMaxQubits = 10;
  static constexpr int kMaxQubits = 22;
  static constexpr int kKrylovDim = 30;

  enum class Method { Auto, Dense, Krylov };

  explicit ExactPropagator(const RingConfig& config, Method method = Method::Auto) : hamiltonian_(config) {
    if (config.L > kMaxQubits) {
      throw CapacityError("exact evolution supports L <= " + std::to_string(kMaxQubits) + ", requested L = " +
                          std::to_string(config.L));
    }
    const bool dense = method == Method::Dense || (method == Method::Auto && config.L <= kDenseMaxQubits);
    if (dense) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hamiltonian_.dense());
      energies_ = solver.eigenvalues();
      vectors_ = solver.eigenvectors();
    }
  }

  bool is_dense() const noexcept { return vectors_.size() > 0; }
  const RingHamiltonian& hamiltonian() const noexcept { return hamiltonian_; }

  StateVector evolve(const StateVector& psi, double t) const {
    detail::check_dimension(psi.num_qubits(), hamiltonian_.num_qubits());
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("evolution time must be finite and non-negative");
    if (t == 0.0) return psi;
    return is_dense() ? evolve_dense(psi, t) : evolve_krylov(psi, t);
  }

 private:
  StateVector evolve_dense(const StateVector& psi, double t) const {
    const auto d = static_cast<Eigen::Index>(psi.dimension());
    Eigen::VectorXd re(d), im(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      re(i) = psi[i].real();
      im(i) = psi[i].imag();
    }
    Eigen::VectorXd cr = vectors_.transpose() * re;
    Eigen::VectorXd ci = vectors_.transpose() * im;
    for (Eigen::Index k = 0; k < d; ++k) {
      const amplitude c = amplitude(cr(k), ci(k)) * std::polar(1.0, -energies_(k) * t);
      cr(k) = c.real();
      ci(k) = c.imag();
    }
    re = vectors_ * cr;
    im = vectors_ * ci;
    StateVector out = psi;
    for (Eigen::Index i = 0; i < d; ++i) out[i] = amplitude(re(i), im(i));
    return out;
  }

  StateVector evolve_krylov(const StateVector& psi, double t) const {
    // Keep |H| h below ~8 so a 30-dimensional Krylov space is converged far
    // beyond 1e-8.
    const double h_max = 8.0 / hamiltonian_.spectral_bound();
    StateVector v = psi;
    double remaining = t;
    while (remaining > 0.0) {
      const double h = std::min(h_max, remaining);
      krylov_step(v, h);
      remaining -= h;
      if (remaining < 1e-14 * t) break;
    }
    return v;
  }

  void krylov_step(StateVector& v, double h) const {
    const auto d = static_cast<Eigen::Index>(v.dimension());
    const auto m_max = static_cast<Eigen::Index>(std::min<std::size_t>(kKrylovDim, v.dimension()));
    Eigen::Map<Eigen::VectorXcd> psi(v.amplitudes().data(), d);
    const double beta0 = psi.norm();
    Eigen::MatrixXcd basis(d, m_max);
    basis.col(0) = psi / beta0;

    std::vector<double> alpha, beta;
    Eigen::VectorXcd w(d);
    for (Eigen::Index j = 0; j < m_max; ++j) {
      hamiltonian_.apply(std::span<const amplitude>(basis.col(j).data(), static_cast<std::size_t>(d)),
                         std::span<amplitude>(w.data(), static_cast<std::size_t>(d)));
      alpha.push_back(basis.col(j).dot(w).real());
      // Full reorthogonalization, twice, against the basis built so far.
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd c = basis.leftCols(j + 1).adjoint() * w;
        w.noalias() -= basis.leftCols(j + 1) * c;
      }
      const double b = w.norm();
      if (j + 1 == m_max || b < 1e-12) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < m) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(tri);
    const auto& s = solver.eigenvectors();
    const auto& e = solver.eigenvalues();
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const amplitude w0 = s(0, k) * std::polar(1.0, -e(k) * h);
      for (Eigen::Index j = 0; j < m; ++j) y(j) += s(j, k) * w0;
    }
    psi.noalias() = beta0 * (basis.leftCols(m) * y);
  }

  RingHamiltonian hamiltonian_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd vectors_;
};

inline StateVector exact_evolve(const RingConfig& config, const StateVector& psi, double t) {
  return ExactPropagator(config).evolve(psi, t);
}

/// (|0..0> + |1..1>)/sqrt(2), or with a minus sign when a vison threads the
/// ring. Same state as run_circuit(build_ghz_prep(L, with_vison)) but also
/// defined for the two-qubit ring.
inline StateVector ghz_state(int L, bool with_vison) {
  StateVector psi(L);
  const double r = 1.0 / std::sqrt(2.0);
  psi[0] = r;
  psi[psi.dimension() - 1] = with_vison ? -r : r;
  return psi;
}

// ---------------------------------------------------------------------------
// Sampling

/// Z-basis outcome histogram. Key character i is the value of qubit i.
using ShotCounts = std::map<std::string, std::uint64_t>;

inline std::string basis_label(std::uint64_t index, int num_qubits) {
  std::string s(num_qubits, '0');
  for (int q = 0; q < num_qubits; ++q) s[q] = ((index >> q) & 1u) ? '1' : '0';
  return s;
}

inline std::uint64_t basis_index(std::string_view label) {
  std::uint64_t idx = 0;
  for (std::size_t q = 0; q < label.size(); ++q) {
    if (label[q] == '1') idx |= std::uint64_t{1} << q;
    else if (label[q] != '0') throw InputError("bitstring may only contain '0' and '1'");
  }
  return idx;
}

/// Draws `n_shots` i.i.d. outcomes of the Born distribution of `state`.
template <BasisDistribution S>
ShotCounts sample_shots(const S& state, std::uint64_t n_shots, std::uint64_t seed) {
  if (n_shots < 1) throw InputError("need at least one shot");
  std::vector<double> cdf(state.dimension());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += std::max(0.0, state.probability(i));
    cdf[i] = acc;
  }
  Rng rng(seed);
  std::vector<std::uint64_t> hits(cdf.size(), 0);
  for (std::uint64_t k = 0; k < n_shots; ++k) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++hits[static_cast<std::size_t>(it - cdf.begin())];
  }
  ShotCounts counts;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i]) counts.emplace(basis_label(i, state.num_qubits()), hits[i]);
  }
  return counts;
}

/// Shot-averaged spinon occupations of a histogram (keys are q0-first).
inline std::vector<double> occupations_from_counts(const ShotCounts& counts, int L) {
  std::vector<double> n(L, 0.0);
  std::uint64_t total = 0;
  for (const auto& [label, hits] : counts) {
    if (static_cast<int>(label.size()) != L) throw InputError("bitstring '" + label + "' does not have length L");
    std::uint64_t mask = bonds::occupation_mask(basis_index(label), L);
    while (mask) {
      n[std::countr_zero(mask)] += static_cast<double>(hits);
      mask &= mask - 1;
    }
    total += hits;
  }
  if (total == 0) throw InputError("empty shot histogram");
  for (auto& x : n) x /= static_cast<double>(total);
  return n;
}

// ---------------------------------------------------------------------------
// Traces

struct TraceLabels {
  bool with_vison = false;
  std::string backend;
  int L = 0;
  double gamma = 0.0;
  int n_steps = 0;
};

/// Per-site spinon occupations, their sum and <B> on a time grid.
struct OccupationTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> occupations;
  std::vector<double> total;
  std::vector<double> vison;
  /// Per-entry standard errors; empty for deterministic backends.
  std::vector<std::vector<double>> occupation_stderr;
  TraceLabels labels;

  std::size_t size() const noexcept { return times.size(); }

  void record(double t, std::vector<double> occ, double vison_value) {
    total.push_back(total_spinons(occ));
    times.push_back(t);
    occupations.push_back(std::move(occ));
    vison.push_back(vison_value);
  }

  const std::vector<double>& final_occupations() const { return occupations.back(); }
  double final_site(int s) const { return occupations.back().at(s); }
};

/// GHZ preparation followed by `n_steps` Trotter steps, sampled after every step.
inline OccupationTrace trotter_trace(const RingConfig& config, double t_max, int n_steps, bool with_vison) {
  config.validate();
  const TrotterStepKernel step(config, t_max, n_steps);
  StateVector psi = run_circuit(build_ghz_prep(config.L, with_vison));
  OccupationTrace trace;
  trace.labels = {with_vison, "statevector", config.L, 0.0, n_steps};
  const double dt = t_max / n_steps;
  trace.record(0.0, spinon_expectations(psi, config.L), vison_expectation(psi));
  for (int k = 1; k <= n_steps; ++k) {
    step.apply(psi);
    trace.record(k * dt, spinon_expectations(psi, config.L), vison_expectation(psi));
  }
  return trace;
}

/// Exact e^{-iHt} evolution of the GHZ state sampled on the grid k t_max / n_steps.
inline OccupationTrace exact_trace(const ExactPropagator& propagator, double t_max, int n_steps, bool with_vison) {
  const RingConfig& config = propagator.hamiltonian().config();
  const StateVector psi0 = ghz_state(config.L, with_vison);
  OccupationTrace trace;
  trace.labels = {with_vison, "exact", config.L, 0.0, n_steps};
  const double dt = t_max / n_steps;
  StateVector psi = psi0;
  for (int k = 0; k <= n_steps; ++k) {
    if (propagator.is_dense()) {
      psi = propagator.evolve(psi0, k * dt);
    } else if (k > 0) {
      psi = propagator.evolve(psi, dt);
    }
    trace.record(k * dt, spinon_expectations(psi, config.L), vison_expectation(psi));
  }
  return trace;
}

inline OccupationTrace exact_trace(const RingConfig& config, double t_max, int n_steps, bool with_vison) {
  return exact_trace(ExactPropagator(config), t_max, n_steps, with_vison);
}

}  // namespace qgrade
