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
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qgrade/errors.hpp"

namespace qgrade {

using amplitude = std::complex<double>;

inline std::size_t dimension_for(int num_qubits) { return std::size_t{1} << num_qubits; }

/// Pure state of an n-qubit register. Bit i of a basis index is the Z-basis
/// value of qubit i (qubit 0 is the least significant bit).
class StateVector {
 public:
  static constexpr int kMaxQubits = 28;

  /// |0...0>
  explicit StateVector(int num_qubits) : num_qubits_(checked(num_qubits)), amps_(dimension_for(num_qubits)) {
    amps_[0] = 1.0;
  }

  static StateVector basis(int num_qubits, std::uint64_t index) {
    StateVector s(num_qubits);
    if (index >= s.dimension()) throw InputError("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[index] = 1.0;
    return s;
  }

  static StateVector from_amplitudes(int num_qubits, std::vector<amplitude> amps) {
    StateVector s(num_qubits);
    if (amps.size() != s.dimension()) {
      throw InputError("expected " + std::to_string(s.dimension()) + " amplitudes, got " +
                       std::to_string(amps.size()));
    }
    s.amps_ = std::move(amps);
    return s;
  }

  int num_qubits() const noexcept { return num_qubits_; }
  std::size_t dimension() const noexcept { return amps_.size(); }

  std::span<amplitude> amplitudes() noexcept { return amps_; }
  std::span<const amplitude> amplitudes() const noexcept { return amps_; }
  amplitude& operator[](std::size_t i) noexcept { return amps_[i]; }
  const amplitude& operator[](std::size_t i) const noexcept { return amps_[i]; }

  double probability(std::size_t i) const noexcept { return std::norm(amps_[i]); }

  double norm() const noexcept {
    double acc = 0.0;
    for (const auto& a : amps_) acc += std::norm(a);
    return std::sqrt(acc);
  }

  void normalize() {
    const double n = norm();
    if (n == 0.0) throw InputError("cannot normalize the zero vector");
    for (auto& a : amps_) a /= n;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  static int checked(int n) {
    if (n < 1) throw InputError("a register needs at least one qubit");
    if (n > kMaxQubits) {
      throw CapacityError("state vector holds at most " + std::to_string(kMaxQubits) + " qubits, requested " +
                          std::to_string(n));
    }
    return n;
  }

  int num_qubits_;
  std::vector<amplitude> amps_;
};

/// Mixed state of an n-qubit register, row-major 2^n x 2^n storage.
class DensityMatrix {
 public:
  static constexpr int kMaxQubits = 12;

  /// |0...0><0...0|
  explicit DensityMatrix(int num_qubits)
      : num_qubits_(checked(num_qubits)), dim_(dimension_for(num_qubits)), elems_(dim_ * dim_) {
    elems_[0] = 1.0;
  }

  static DensityMatrix from_pure(const StateVector& psi) {
    DensityMatrix rho(psi.num_qubits());
    const std::size_t d = rho.dim_;
    for (std::size_t r = 0; r < d; ++r) {
      for (std::size_t c = 0; c < d; ++c) rho.elems_[r * d + c] = psi[r] * std::conj(psi[c]);
    }
    return rho;
  }

  static DensityMatrix maximally_mixed(int num_qubits) {
    DensityMatrix rho(num_qubits);
    rho.elems_[0] = 0.0;
    const double p = 1.0 / static_cast<double>(rho.dim_);
    for (std::size_t i = 0; i < rho.dim_; ++i) rho(i, i) = p;
    return rho;
  }

  static DensityMatrix from_elements(int num_qubits, std::vector<amplitude> row_major) {
    DensityMatrix rho(num_qubits);
    if (row_major.size() != rho.elems_.size()) throw InputError("density matrix element count mismatch");
    rho.elems_ = std::move(row_major);
    return rho;
  }

  int num_qubits() const noexcept { return num_qubits_; }
  std::size_t dimension() const noexcept { return dim_; }

  amplitude& operator()(std::size_t r, std::size_t c) noexcept { return elems_[r * dim_ + c]; }
  const amplitude& operator()(std::size_t r, std::size_t c) const noexcept { return elems_[r * dim_ + c]; }
  std::span<amplitude> elements() noexcept { return elems_; }
  std::span<const amplitude> elements() const noexcept { return elems_; }

  double probability(std::size_t i) const noexcept { return (*this)(i, i).real(); }

  amplitude trace() const noexcept {
    amplitude t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  /// max |rho - rho^dagger| over entries
  double hermiticity_error() const noexcept {
    double worst = 0.0;
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = r; c < dim_; ++c) {
        worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
      }
    }
    return worst;
  }

  /// Smallest eigenvalue of the Hermitian part. O(d^3).
  double min_eigenvalue() const {
    Eigen::MatrixXcd m(dim_, dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            0.5 * ((*this)(r, c) + std::conj((*this)(c, r)));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

 private:
  static int checked(int n) {
    if (n < 1) throw InputError("a register needs at least one qubit");
    if (n > kMaxQubits) {
      throw CapacityError("density matrix holds at most " + std::to_string(kMaxQubits) +
                          " qubits, requested " + std::to_string(n) + "; use the trajectory backend");
    }
    return n;
  }

  int num_qubits_;
  std::size_t dim_;
  std::vector<amplitude> elems_;
};

/// Anything exposing Z-basis outcome probabilities.
template <typename S>
concept BasisDistribution = requires(const S& s, std::size_t i) {
  { s.num_qubits() } -> std::convertible_to<int>;
  { s.dimension() } -> std::convertible_to<std::size_t>;
  { s.probability(i) } -> std::convertible_to<double>;
};

}  // namespace qgrade
