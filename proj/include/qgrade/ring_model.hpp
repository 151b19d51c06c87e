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

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qgrade/errors.hpp"
#include "qgrade/state.hpp"

namespace qgrade {

/// Physical and protocol parameters of one benchmark instance.
///
/// Energies are in units of J, times in units of 1/J.
struct RingConfig {
  int L = 4;
  double J = 1.0;
  double Gamma = 0.1;
  /// Lindblad rate of the isotropic single-qubit bath.
  double gamma = 0.0;
  int twist_site = 0;
  double threshold = 0.2;
  int shots = 1000;

  static int default_shots(int L) { return L <= 16 ? 1000 : 2000; }

  void validate() const {
    if (L < 2 || L % 2 != 0) throw InputError("ring size L must be even and >= 2, got " + std::to_string(L));
    if (!(J > 0.0) || !std::isfinite(J)) throw InputError("J must be positive");
    if (!(Gamma > 0.0) || !std::isfinite(Gamma)) throw InputError("Gamma must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw InputError("gamma must be non-negative");
    if (twist_site != 0) throw InputError("the twisted bond is fixed to site 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw InputError("threshold must lie in (0, 1)");
    if (shots < 1) throw InputError("shots must be positive");
  }

  friend bool operator==(const RingConfig&, const RingConfig&) = default;
};

/// Ring layout. Qubits are 0..L-1; bond (spinon site) s joins qubits s and
/// (s+1) mod L. Bond 0 is antiferromagnetic (J_0 = -1), all others +1. The
/// detection site L/2 is diametrically opposite the twisted bond.
namespace bonds {

inline constexpr int kTwistBond = 0;

constexpr int sign(int s) noexcept { return s == kTwistBond ? -1 : +1; }
constexpr int left_qubit(int s, int) noexcept { return s; }
constexpr int right_qubit(int s, int L) noexcept { return (s + 1) % L; }
constexpr int detection_site(int L) noexcept { return L / 2; }

/// Bit s set iff bond s hosts a spinon in basis state `basis`.
constexpr std::uint64_t occupation_mask(std::uint64_t basis, int L) noexcept {
  const std::uint64_t full = L >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << L) - 1;
  const std::uint64_t rotated = (basis >> 1) | ((basis & 1u) << (L - 1));
  // A wall sits where neighbours differ; on the twisted bond the roles swap.
  return ((basis ^ rotated) & full) ^ (std::uint64_t{1} << kTwistBond);
}

constexpr int occupation(std::uint64_t basis, int s, int L) noexcept {
  return static_cast<int>((occupation_mask(basis, L) >> s) & 1u);
}

}  // namespace bonds

/// Spinon occupations n_s = (1 - J_s z_s z_{s+1}) / 2 of a Z-basis readout.
inline std::vector<int> spinon_occupations(std::span<const std::uint8_t> bits, int L) {
  if (static_cast<int>(bits.size()) != L) {
    throw InputError("bitstring has length " + std::to_string(bits.size()) + ", ring has " + std::to_string(L));
  }
  if (L < 2) throw InputError("ring needs at least two qubits");
  std::uint64_t basis = 0;
  for (int i = 0; i < L; ++i) {
    if (bits[i] > 1) throw InputError("bit values must be 0 or 1");
    basis |= static_cast<std::uint64_t>(bits[i]) << i;
  }
  const std::uint64_t mask = bonds::occupation_mask(basis, L);
  std::vector<int> n(L);
  for (int s = 0; s < L; ++s) n[s] = static_cast<int>((mask >> s) & 1u);
  return n;
}

namespace detail {
inline void check_dimension(int have, int L) {
  if (have != L) {
    throw InputError("state has " + std::to_string(have) + " qubits, ring has " + std::to_string(L));
  }
}
}  // namespace detail

/// <n_s> for every bond, from the Z-basis distribution of a pure or mixed state.
template <BasisDistribution S>
std::vector<double> spinon_expectations(const S& state, int L) {
  detail::check_dimension(state.num_qubits(), L);
  std::vector<double> n(L, 0.0);
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const double p = state.probability(i);
    if (p == 0.0) continue;
    std::uint64_t mask = bonds::occupation_mask(i, L);
    while (mask) {
      n[std::countr_zero(mask)] += p;
      mask &= mask - 1;
    }
  }
  return n;
}

template <BasisDistribution S>
std::vector<double> spinon_expectations(const S& state, const RingConfig& config) {
  return spinon_expectations(state, config.L);
}

/// <prod_s (1 - 2 n_s)>; identically -1 on the odd-spinon sector.
template <BasisDistribution S>
double spinon_parity(const S& state) {
  double acc = 0.0;
  const int L = state.num_qubits();
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    acc += (std::popcount(bonds::occupation_mask(i, L)) % 2 ? -1.0 : 1.0) * state.probability(i);
  }
  return acc;
}

/// Probability of the configuration with exactly one spinon, sitting on `site`.
/// Unlike <n_site> this excludes virtual pair fluctuations.
template <BasisDistribution S>
double single_spinon_probability(const S& state, int site) {
  const int L = state.num_qubits();
  if (site < 0 || site >= L) throw InputError("site out of range");
  const std::uint64_t want = std::uint64_t{1} << site;
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (bonds::occupation_mask(i, L) == want) acc += state.probability(i);
  }
  return acc;
}

/// <B> with B the product of sigma^x over the whole ring.
inline double vison_expectation(const StateVector& psi) {
  const std::size_t flip = psi.dimension() - 1;
  amplitude acc = 0.0;
  for (std::size_t i = 0; i < psi.dimension(); ++i) acc += std::conj(psi[i ^ flip]) * psi[i];
  return acc.real();
}

inline double vison_expectation(const DensityMatrix& rho) {
  const std::size_t flip = rho.dimension() - 1;
  amplitude acc = 0.0;
  for (std::size_t i = 0; i < rho.dimension(); ++i) acc += rho(i ^ flip, i);
  return acc.real();
}

inline double total_spinons(std::span<const double> occupations) {
  return std::accumulate(occupations.begin(), occupations.end(), 0.0);
}

/// H = J A_0 - J sum_{s != 0} A_s - Gamma sum_i sigma^x_i with A_s = Z_s Z_{s+1}.
///
/// Stored matrix-free: the diagonal bond energies plus the transverse field.
/// A dense copy is available up to kDenseMaxQubits.
class RingHamiltonian {
 public:
  static constexpr int kDenseMaxQubits = 12;

  explicit RingHamiltonian(const RingConfig& config) : config_(config) {
    config_.validate();
    if (config_.L > StateVector::kMaxQubits) {
      throw CapacityError("Hamiltonian apply supports L <= " + std::to_string(StateVector::kMaxQubits));
    }
    const std::size_t d = dimension_for(config_.L);
    diagonal_.resize(d);
    for (std::size_t b = 0; b < d; ++b) {
      const int spinons = std::popcount(bonds::occupation_mask(b, config_.L));
      // sum_s J_s z_s z_{s+1} = sum_s (1 - 2 n_s)
      diagonal_[b] = -config_.J * static_cast<double>(config_.L - 2 * spinons);
    }
  }

  const RingConfig& config() const noexcept { return config_; }
  int num_qubits() const noexcept { return config_.L; }
  std::size_t dimension() const noexcept { return diagonal_.size(); }
  std::span<const double> diagonal() const noexcept { return diagonal_; }

  /// Upper bound on the spectral radius.
  double spectral_bound() const noexcept { return config_.L * (config_.J + config_.Gamma); }

  void apply(std::span<const amplitude> in, std::span<amplitude> out) const {
    const std::size_t d = dimension();
    if (in.size() != d || out.size() != d) throw InputError("Hamiltonian apply: dimension mismatch");
    const double g = config_.Gamma;
    for (std::size_t b = 0; b < d; ++b) {
      amplitude acc = diagonal_[b] * in[b];
      for (int q = 0; q < config_.L; ++q) acc -= g * in[b ^ (std::size_t{1} << q)];
      out[b] = acc;
    }
  }

  Eigen::MatrixXd dense() const {
    if (config_.L > kDenseMaxQubits) {
      throw CapacityError("dense Hamiltonian limited to L <= " + std::to_string(kDenseMaxQubits) +
                          ", requested L = " + std::to_string(config_.L));
    }
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
      h(b, b) = diagonal_[b];
      for (int q = 0; q < config_.L; ++q) h(b, b ^ (Eigen::Index{1} << q)) -= config_.Gamma;
    }
    return h;
  }

 private:
  RingConfig config_;
  std::vector<double> diagonal_;
};

inline RingHamiltonian build_hamiltonian(const RingConfig& config) { return RingHamiltonian(config); }

}  // namespace qgrade
