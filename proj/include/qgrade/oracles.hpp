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
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "qgrade/errors.hpp"

namespace qgrade::oracles {

/// Closed-form populations of the two-qubit ring under the isotropic bath,
/// in the spinon-position / vison basis. The vison branch is the blockaded
/// one (no oscillation), the vison-free branch oscillates as cos(4 Gamma t).
class TwoQubitSolution {
 public:
  TwoQubitSolution(double Gamma, double gamma, bool with_vison) : Gamma_(Gamma), gamma_(gamma), vison_(with_vison) {
    if (!(gamma >= 0.0)) throw InputError("gamma must be non-negative");
  }

  struct Populations {
    double left;          // spinon at s = 0, branch of the initial state
    double right;         // spinon at s = 1, same branch
    double left_other;    // spinon at s = 0, opposite branch
    double right_other;   // spinon at s = 1, opposite branch
    double sum() const noexcept { return left + right + left_other + right_other; }
  };

  Populations populations(double t) const {
    if (!(t >= 0.0)) throw InputError("time must be non-negative");
    const double e = std::exp(-8.0 * gamma_ * t);
    if (vison_) {
      return {0.25 + 0.75 * e, 0.25 - 0.25 * e, 0.25 - 0.25 * e, 0.25 - 0.25 * e};
    }
    const double c = 0.5 * e * std::cos(4.0 * Gamma_ * t);
    return {0.25 + 0.25 * e + c, 0.25 + 0.25 * e - c, 0.25 - 0.25 * e, 0.25 - 0.25 * e};
  }

  /// (n_left, n_right): populations summed over the vison label.
  std::pair<double, double> occupations(double t) const {
    const auto p = populations(t);
    return {p.left + p.left_other, p.right + p.right_other};
  }

 private:
  double Gamma_;
  double gamma_;
  bool vison_;
};

inline std::pair<double, double> two_qubit_occupations(double Gamma, double gamma, double t, bool with_vison) {
  return TwoQubitSolution(Gamma, gamma, with_vison).occupations(t);
}

/// Amplitude at site x and time t of a particle launched from x = 0 on a
/// tight-binding ring of L sites with hopping Gamma and flux phi:
///   (1/L) sum_j exp(-i t 2 Gamma cos k_j) exp(i k_j x),
///   k_j = (2 pi / L)(j + phi / 2 pi),  j = -L/2 .. L/2 - 1.
inline std::complex<double> ring_wavefunction(int L, double Gamma, double phi, int x, double t) {
  if (L < 2 || L % 2 != 0) throw InputError("ring size must be even and >= 2");
  if (x < 0 || x >= L) throw InputError("site " + std::to_string(x) + " outside [0, L)");
  std::complex<double> acc = 0.0;
  for (int j = -L / 2; j < L / 2; ++j) {
    const double k = 2.0 * std::numbers::pi / L * (j + phi / (2.0 * std::numbers::pi));
    acc += std::polar(1.0, -t * 2.0 * Gamma * std::cos(k) + k * x);
  }
  return acc / static_cast<double>(L);
}

inline double arrival_probability(int L, double Gamma, double phi, double t) {
  return std::norm(ring_wavefunction(L, Gamma, phi, L / 2, t));
}

/// Single-spinon estimate of the first arrival time at the opposite site.
inline double predict_tmax(int L, double Gamma) {
  if (L < 2 || L % 2 != 0) throw InputError("ring size must be even and >= 2");
  if (!(Gamma > 0.0)) throw InputError("Gamma must be positive");
  return L / (4.0 * Gamma);
}

/// Empirical linear fit of calibrated arrival times at J = 1, Gamma = 0.1.
inline double tmax_linear_fit(int L) { return 5.0 + 2.25 * L; }

}  // namespace qgrade::oracles
