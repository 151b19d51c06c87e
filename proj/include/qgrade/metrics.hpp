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
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qgrade/errors.hpp"
#include "qgrade/format.hpp"
#include "qgrade/ring_model.hpp"
#include "qgrade/statevector.hpp"

namespace qgrade {

// ---------------------------------------------------------------------------
// Arrival peak

/// Index of the first arrival peak of a sampled curve.
///
/// Small fast ripples from virtual pair creation ride on top of the slow
/// single-spinon motion, so a plain "first local maximum" fires at t ~ 1.
/// We take the first excursion above half of the curve's maximum and return
/// the earliest argmax inside it. The peak must be followed by a drop inside
/// the window.
inline std::size_t find_first_peak(std::span<const double> values) {
  if (values.size() < 3) throw ProtocolError("peak search needs at least three samples");
  const double top = *std::max_element(values.begin() + 1, values.end());
  const double level = 0.5 * top;
  std::size_t k = 1;
  while (k < values.size() && values[k] < level) ++k;
  if (k >= values.size() || top <= 0.0) throw ProtocolError("no arrival peak in the search window");
  std::size_t best = k;
  for (; k < values.size() && values[k] >= level; ++k) {
    if (values[k] > values[best]) best = k;
  }
  if (best + 1 >= values.size()) throw ProtocolError("arrival peak not closed inside the search window");
  return best;
}

struct TmaxSearch {
  /// Reference Trotter step (1/J units); small enough that the ZZ angle per
  /// step is 0.1 rad at J = 1.
  double reference_step = 0.05;
  /// Window upper end in units of L / Gamma.
  double window = 4.0;
};

/// Time of the first maximum of <n_{L/2}> without a vison, from a fine
/// noiseless Trotter reference, rounded to the nearest integer.
inline int find_tmax(const RingConfig& config, const TmaxSearch& search = {}) {
  config.validate();
  detail::check_circuit_ring(config.L);
  const double t_window = search.window * config.L / config.Gamma;
  const int n_ref = static_cast<int>(std::ceil(t_window / search.reference_step));
  const double dt = t_window / n_ref;
  const TrotterStepKernel step(config, t_window, n_ref);
  StateVector psi = ghz_state(config.L, false);
  const int site = bonds::detection_site(config.L);
  std::vector<double> n(static_cast<std::size_t>(n_ref) + 1);
  n[0] = spinon_expectations(psi, config.L)[site];
  for (int k = 1; k <= n_ref; ++k) {
    step.apply(psi);
    n[k] = spinon_expectations(psi, config.L)[site];
  }
  // The scan starts at t = 1.
  const auto first = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / dt)));
  const std::size_t peak = first + find_first_peak(std::span<const double>(n).subspan(first - 1)) - 1;
  return static_cast<int>(std::lround(peak * dt));
}

// ---------------------------------------------------------------------------
// Trotter error

/// Vison and vison-free traces on a shared grid.
struct TracePair {
  OccupationTrace vison;
  OccupationTrace no_vison;
};

/// Root-mean-square occupation error between a reference and a Trotterized
/// pair over all sites, both branches and the n_steps non-zero grid times.
inline double trotter_error(const TracePair& reference, const TracePair& trotter, int n_steps, int L) {
  const OccupationTrace* refs[2] = {&reference.vison, &reference.no_vison};
  const OccupationTrace* trots[2] = {&trotter.vison, &trotter.no_vison};
  double acc = 0.0;
  for (int b = 0; b < 2; ++b) {
    const auto& r = *refs[b];
    const auto& q = *trots[b];
    const auto rows = static_cast<std::size_t>(n_steps) + 1;
    if (r.size() != rows || q.size() != rows) throw InputError("traces do not have n_steps + 1 rows");
    for (std::size_t k = 1; k < rows; ++k) {
      if (std::abs(r.times[k] - q.times[k]) > 1e-9 * std::max(1.0, std::abs(r.times[k]))) {
        throw InputError("trace time grids differ");
      }
      if (static_cast<int>(r.occupations[k].size()) != L || static_cast<int>(q.occupations[k].size()) != L) {
        throw InputError("trace width differs from L");
      }
      for (int s = 0; s < L; ++s) {
        const double d = r.occupations[k][s] - q.occupations[k][s];
        acc += d * d;
      }
    }
  }
  return std::sqrt(acc / (2.0 * n_steps * L));
}

/// Trotter error of the benchmark circuit with n_steps steps up to t_max,
/// against exact evolution.
inline double trotter_error(const ExactPropagator& exact, double t_max, int n_steps) {
  const RingConfig& config = exact.hamiltonian().config();
  const TracePair ref{exact_trace(exact, t_max, n_steps, true), exact_trace(exact, t_max, n_steps, false)};
  const TracePair trot{trotter_trace(config, t_max, n_steps, true), trotter_trace(config, t_max, n_steps, false)};
  return trotter_error(ref, trot, n_steps, config.L);
}

struct NoptResult {
  int n_opt = 0;
  double delta = 0.0;
  /// delta(N) for every N examined, starting at N = 2.
  std::vector<double> scanned;
};

/// Smallest N whose Trotter error and that of N + 1 are both within the
/// threshold. At these step sizes the ZZ angle exceeds pi and delta(N) has
/// isolated resonant dips; requiring two consecutive passes skips them.
inline NoptResult find_nopt(const RingConfig& config, double t_max, double delta_threshold = 0.15,
                            std::optional<int> n_max = std::nullopt) {
  config.validate();
  detail::check_circuit_ring(config.L);
  const int limit = n_max.value_or(20 * (config.L + 2));
  const ExactPropagator exact(config);
  NoptResult result;
  auto delta_at = [&](int n) {
    const std::size_t idx = static_cast<std::size_t>(n - 2);
    while (result.scanned.size() <= idx) {
      result.scanned.push_back(trotter_error(exact, t_max, static_cast<int>(result.scanned.size()) + 2));
    }
    return result.scanned[idx];
  };
  for (int n = 2; n < limit; ++n) {
    if (delta_at(n) <= delta_threshold && delta_at(n + 1) <= delta_threshold) {
      result.n_opt = n;
      result.delta = delta_at(n);
      return result;
    }
  }
  throw ProtocolError("no Trotter step count up to " + std::to_string(limit) + " meets delta <= " +
                      format_double(delta_threshold));
}

// ---------------------------------------------------------------------------
// Coherence ratio

namespace detail {
inline double reference_contrast(double n_v_0, double n_nov_0) {
  const double den = n_v_0 - n_nov_0;
  if (!(std::abs(den) > 1e-9)) throw ProtocolError("noiseless vison/no-vison contrast vanishes; reference is degenerate");
  return den;
}
}  // namespace detail

/// R = (n_v - n_nov)_noisy / (n_v - n_nov)_noiseless at the detection site.
inline double coherence_ratio(double n_v_gamma, double n_nov_gamma, double n_v_0, double n_nov_0) {
  return (n_v_gamma - n_nov_gamma) / detail::reference_contrast(n_v_0, n_nov_0);
}

/// Binomial shot-noise uncertainty of R; the noiseless reference is exact.
inline double ratio_stderr(double n_v_gamma, double n_nov_gamma, double n_v_0, double n_nov_0, double n_shots) {
  if (!(n_shots >= 1.0)) throw InputError("need at least one shot");
  const double den = detail::reference_contrast(n_v_0, n_nov_0);
  const double var = (1.0 - n_v_gamma) * n_v_gamma + (1.0 - n_nov_gamma) * n_nov_gamma;
  return std::sqrt(std::max(0.0, var) / (n_shots * den * den));
}

// ---------------------------------------------------------------------------
// Q-grade

struct QGrade {
  enum class Kind { Value, None, Unbounded };
  Kind kind = Kind::None;
  int L = 0;

  static QGrade value(int L) { return {Kind::Value, L}; }
  static QGrade none() { return {Kind::None, 0}; }
  static QGrade unbounded() { return {Kind::Unbounded, 0}; }

  std::string str() const {
    switch (kind) {
      case Kind::Value: return std::to_string(L);
      case Kind::None: return "none";
      case Kind::Unbounded: return "unbounded";
    }
    return "none";
  }

  friend bool operator==(const QGrade&, const QGrade&) = default;
};

struct RatioPoint {
  int L = 0;
  double R = 0.0;
};

/// Largest even L with R >= threshold. "unbounded" only when every row
/// passes and the caller declares the sweep exhaustive at its cap.
inline QGrade qgrade(std::span<const RatioPoint> rows, double threshold, bool exhaustive = false) {
  if (rows.empty()) throw InputError("Q-grade needs at least one row");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].L < 2 || rows[i].L % 2 != 0) throw InputError("Q-grade rows must have even L");
    if (i > 0 && rows[i].L <= rows[i - 1].L) throw InputError("Q-grade rows must be sorted by ascending L");
  }
  const bool all_pass = std::all_of(rows.begin(), rows.end(), [&](const RatioPoint& r) { return r.R >= threshold; });
  if (all_pass && exhaustive) return QGrade::unbounded();
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->R >= threshold) return QGrade::value(it->L);
  }
  return QGrade::none();
}

// ---------------------------------------------------------------------------
// Records

/// Per-L protocol parameters plus the noiseless reference occupations at the
/// detection site, so hardware results can be graded without re-simulating.
struct CalibrationRecord {
  int L = 0;
  int t_max = 0;
  int n_opt = 0;
  double delta = 0.0;
  std::string method = "fine-trotter+exact";
  double n_v_0 = 0.0;
  double n_nov_0 = 0.0;

  friend bool operator==(const CalibrationRecord&, const CalibrationRecord&) = default;
};

/// Noiseless Trotterized occupations at the detection site after n_steps.
inline std::pair<double, double> noiseless_reference(const RingConfig& config, double t_max, int n_steps) {
  const int site = bonds::detection_site(config.L);
  return {trotter_trace(config, t_max, n_steps, true).final_site(site),
          trotter_trace(config, t_max, n_steps, false).final_site(site)};
}

inline CalibrationRecord calibrate(const RingConfig& config, double delta_threshold = 0.15) {
  CalibrationRecord rec;
  rec.L = config.L;
  rec.t_max = find_tmax(config);
  const NoptResult nopt = find_nopt(config, rec.t_max, delta_threshold);
  rec.n_opt = nopt.n_opt;
  rec.delta = nopt.delta;
  std::tie(rec.n_v_0, rec.n_nov_0) = noiseless_reference(config, rec.t_max, rec.n_opt);
  return rec;
}

struct RatioRow {
  int L = 0;
  double R = 0.0;
  double dR = 0.0;
  double n_v_gamma = 0.0;
  double n_nov_gamma = 0.0;
  double n_v_0 = 0.0;
  double n_nov_0 = 0.0;
  std::uint64_t shots = 0;

  friend bool operator==(const RatioRow&, const RatioRow&) = default;
};

inline RatioRow make_ratio_row(int L, double n_v_gamma, double n_nov_gamma, double n_v_0, double n_nov_0,
                               std::uint64_t shots) {
  return {L,       coherence_ratio(n_v_gamma, n_nov_gamma, n_v_0, n_nov_0),
          ratio_stderr(n_v_gamma, n_nov_gamma, n_v_0, n_nov_0, static_cast<double>(shots)),
          n_v_gamma, n_nov_gamma, n_v_0, n_nov_0, shots};
}

struct QGradeReport {
  std::string label;
  double threshold = 0.2;
  std::vector<RatioRow> rows;
  bool exhaustive = false;
  QGrade grade;

  void finalize() {
    std::sort(rows.begin(), rows.end(), [](const RatioRow& a, const RatioRow& b) { return a.L < b.L; });
    std::vector<RatioPoint> points;
    for (const auto& r : rows) points.push_back({r.L, r.R});
    grade = qgrade(points, threshold, exhaustive);
  }
};

}  // namespace qgrade
