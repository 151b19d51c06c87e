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
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "qgrade/circuit.hpp"
#include "qgrade/errors.hpp"
#include "qgrade/format.hpp"
#include "qgrade/ring_model.hpp"
#include "qgrade/state.hpp"
#include "qgrade/statevector.hpp"

namespace qgrade {

/// Isotropic single-qubit bath of rate gamma, integrated over a step dt into a
/// depolarizing channel rho -> (1 - lambda) rho + lambda Tr_q(rho) x I/2.
struct NoiseModel {
  double gamma = 0.0;

  /// Bloch vectors shrink by e^{-4 gamma dt}, the decay rate of the dissipator.
  double lambda(double dt) const noexcept { return -std::expm1(-4.0 * gamma * dt); }
};

// ---------------------------------------------------------------------------
// Density-matrix kernels
//
// A row-major rho of L qubits is a 2L-qubit amplitude array whose high L bits
// index rows and low L bits index columns, so U rho U^dagger is U on the
// high bits and conj(U) on the low bits.

inline Gate conjugate_gate(Gate g) {
  if (is_rotation(g.kind)) g.theta = -g.theta;
  return g;
}

inline void apply_gate(DensityMatrix& rho, const Gate& gate) {
  const int L = rho.num_qubits();
  Gate row = gate;
  row.qubit += L;
  if (row.kind == GateKind::CNOT) row.target += L;
  if (gate.qubit < 0 || gate.qubit >= L || (gate.kind == GateKind::CNOT && (gate.target < 0 || gate.target >= L))) {
    throw InputError("gate qubit out of range");
  }
  apply_gate(rho.elements(), 2 * L, row);
  apply_gate(rho.elements(), 2 * L, conjugate_gate(gate));
}

inline void run_circuit(const Circuit& circuit, DensityMatrix& rho) {
  detail::check_dimension(rho.num_qubits(), circuit.num_qubits());
  for (const Gate& g : circuit.gates()) apply_gate(rho, g);
}

inline void apply_trotter_step(const TrotterStepKernel& step, DensityMatrix& rho) {
  const int L = step.num_qubits();
  detail::check_dimension(rho.num_qubits(), L);
  const std::size_t d = rho.dimension();
  std::vector<amplitude> phase(d);
  for (std::size_t b = 0; b < d; ++b) phase[b] = step.zz_phase(b);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) rho(r, c) *= phase[r] * std::conj(phase[c]);
  }
  auto flat = rho.elements();
  const double theta = step.angles().theta_x;
  for (int q = 0; q < L; ++q) {
    kernels::rx(flat, q + L, theta);
    kernels::rx(flat, q, -theta);
  }
}

/// rho -> (1 - lambda) rho + lambda Tr_q(rho) x I/2 on one qubit.
inline void depolarize_qubit(DensityMatrix& rho, int qubit, double lambda) {
  if (qubit < 0 || qubit >= rho.num_qubits()) throw InputError("qubit " + std::to_string(qubit) + " out of range");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InputError("depolarizing strength must lie in [0, 1]");
  if (lambda == 0.0) return;
  const std::size_t d = rho.dimension();
  const std::size_t m = std::size_t{1} << qubit;
  const double keep = 1.0 - lambda;
  const double stay = 1.0 - 0.5 * lambda;
  const double swap = 0.5 * lambda;
  for (std::size_t r0 = 0; r0 < d; ++r0) {
    if (r0 & m) continue;
    const std::size_t r1 = r0 | m;
    for (std::size_t c0 = 0; c0 < d; ++c0) {
      if (c0 & m) continue;
      const std::size_t c1 = c0 | m;
      const amplitude a00 = rho(r0, c0);
      const amplitude a11 = rho(r1, c1);
      rho(r0, c0) = stay * a00 + swap * a11;
      rho(r1, c1) = stay * a11 + swap * a00;
      rho(r0, c1) *= keep;
      rho(r1, c0) *= keep;
    }
  }
}

inline void depolarize_all(DensityMatrix& rho, double lambda) {
  for (int q = 0; q < rho.num_qubits(); ++q) depolarize_qubit(rho, q, lambda);
}

struct PhysicalityCheck {
  double trace_error = 0.0;
  double hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
};

inline PhysicalityCheck check_physical(const DensityMatrix& rho, bool with_spectrum = true) {
  PhysicalityCheck c;
  c.trace_error = std::abs(rho.trace() - amplitude(1.0));
  c.hermiticity_error = rho.hermiticity_error();
  c.min_eigenvalue = with_spectrum ? rho.min_eigenvalue() : 0.0;
  return c;
}

struct NoisyOptions {
  /// Run check_physical after every step and raise on violations. The
  /// spectrum is O(d^3), so this is meant for small rings.
  bool monitor_physicality = false;
  double trace_tolerance = 1e-10;
  double hermiticity_tolerance = 1e-10;
  double eigenvalue_floor = -1e-8;
  /// Worker threads for trajectories; 0 picks hardware concurrency.
  unsigned threads = 0;
  /// Trajectory averages: evaluate the error-free history once, weight it by
  /// its exact probability, and sample only histories with at least one
  /// error. Unbiased; the variance shrinks by (1 - p_clean)^2.
  bool stratify = true;
};

namespace detail {
inline void monitor(const DensityMatrix& rho, const NoisyOptions& opt, double t) {
  if (!opt.monitor_physicality) return;
  const auto c = check_physical(rho);
  if (c.trace_error > opt.trace_tolerance || c.hermiticity_error > opt.hermiticity_tolerance ||
      c.min_eigenvalue < opt.eigenvalue_floor) {
    throw ProtocolError("density matrix left the physical set at t = " + format_double(t) +
                        " (trace error " + format_double(c.trace_error) + ", hermiticity error " +
                        format_double(c.hermiticity_error) + ", min eigenvalue " + format_double(c.min_eigenvalue) +
                        ")");
  }
}
}  // namespace detail

/// Density-matrix run of the benchmark circuit: GHZ preparation, then
/// alternating Trotter steps and one depolarizing channel per qubit.
inline OccupationTrace lindblad_trotter_trace(const RingConfig& config, double t_max, int n_steps, bool with_vison,
                                              const NoisyOptions& options = {},
                                              DensityMatrix* final_state = nullptr) {
  config.validate();
  if (config.L > DensityMatrix::kMaxQubits) {
    throw CapacityError("density-matrix backend supports L <= " + std::to_string(DensityMatrix::kMaxQubits) +
                        ", requested L = " + std::to_string(config.L) + "; use the trajectory backend");
  }
  const TrotterStepKernel step(config, t_max, n_steps);
  const double dt = t_max / n_steps;
  const double lambda = NoiseModel{config.gamma}.lambda(dt);
  DensityMatrix rho = DensityMatrix::from_pure(ghz_state(config.L, with_vison));
  OccupationTrace trace;
  trace.labels = {with_vison, "density-matrix", config.L, config.gamma, n_steps};
  trace.record(0.0, spinon_expectations(rho, config.L), vison_expectation(rho));
  for (int k = 1; k <= n_steps; ++k) {
    apply_trotter_step(step, rho);
    depolarize_all(rho, lambda);
    detail::monitor(rho, options, k * dt);
    trace.record(k * dt, spinon_expectations(rho, config.L), vison_expectation(rho));
  }
  if (final_state) *final_state = std::move(rho);
  return trace;
}

/// Continuous-time reference for the Lindblad equation by first-order
/// splitting: exact e^{-iH dt} conjugation followed by lambda(dt) channels.
inline OccupationTrace fine_lindblad_trace(const RingConfig& config, double t_total, double dt, bool with_vison,
                                           const NoisyOptions& options = {}) {
  config.validate();
  if (config.L > ExactPropagator::kDenseMaxQubits) {
    throw CapacityError("fine Lindblad reference supports L <= " + std::to_string(ExactPropagator::kDenseMaxQubits));
  }
  if (!(dt > 0.0) || dt > 0.1 / config.Gamma + 1e-15) throw InputError("fine Lindblad step must satisfy 0 < dt <= 0.1/Gamma");
  if (!(t_total >= 0.0)) throw InputError("total time must be non-negative");
  const int n_steps = std::max(1, static_cast<int>(std::ceil(t_total / dt - 1e-9)));
  const double h = t_total / n_steps;

  using Mat = Eigen::Matrix<amplitude, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(RingHamiltonian(config).dense());
  const auto& v = solver.eigenvectors();
  Eigen::VectorXcd phases(v.cols());
  for (Eigen::Index k = 0; k < v.cols(); ++k) phases(k) = std::polar(1.0, -solver.eigenvalues()(k) * h);
  const Mat vc = v.cast<amplitude>();
  const Mat u = vc * phases.asDiagonal() * vc.transpose();
  const Mat u_dag = u.adjoint();

  const double lambda = NoiseModel{config.gamma}.lambda(h);
  DensityMatrix rho = DensityMatrix::from_pure(ghz_state(config.L, with_vison));
  const auto d = static_cast<Eigen::Index>(rho.dimension());
  OccupationTrace trace;
  trace.labels = {with_vison, "lindblad-fine", config.L, config.gamma, n_steps};
  trace.record(0.0, spinon_expectations(rho, config.L), vison_expectation(rho));
  for (int k = 1; k <= n_steps; ++k) {
    Eigen::Map<Mat> m(rho.elements().data(), d, d);
    const Mat next = u * m * u_dag;
    m = next;
    depolarize_all(rho, lambda);
    detail::monitor(rho, options, k * h);
    trace.record(k * h, spinon_expectations(rho, config.L), vison_expectation(rho));
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Pauli trajectories

namespace detail {

/// One stochastic unraveling: after each Trotter step every qubit suffers,
/// with probability 3 lambda / 4, a uniformly chosen X, Y or Z. With
/// `force_error` the history is drawn conditioned on at least one error: the
/// first error slot (step-major, then qubit) follows a truncated geometric law.
template <typename OnStep>
void run_trajectory(const TrotterStepKernel& step, int L, bool with_vison, int n_steps, double lambda,
                    std::uint64_t seed, OnStep&& on_step, bool force_error = false) {
  Rng rng(seed);
  StateVector psi = ghz_state(L, with_vison);
  on_step(0, psi);
  const double p_error = 0.75 * lambda;
  const long long slots = static_cast<long long>(L) * n_steps;
  long long first = -1;
  if (force_error && p_error > 0.0) {
    const double p_clean = std::pow(1.0 - p_error, static_cast<double>(slots));
    const double u = uniform01(rng);
    first = p_error >= 1.0 ? 0
                           : static_cast<long long>(std::floor(std::log1p(-u * (1.0 - p_clean)) / std::log1p(-p_error)));
    first = std::clamp(first, 0LL, slots - 1);
  }
  long long slot = 0;
  for (int k = 1; k <= n_steps; ++k) {
    step.apply(psi);
    if (p_error > 0.0) {
      for (int q = 0; q < L; ++q, ++slot) {
        if (slot < first) continue;
        if (slot != first && uniform01(rng) >= p_error) continue;
        const int which = std::min(2, static_cast<int>(3.0 * uniform01(rng)));
        // Y = i X Z; the global phase is irrelevant.
        if (which != 0) apply_gate(psi, Gate::z(q));
        if (which != 2) apply_gate(psi, Gate::x(q));
      }
    }
    on_step(k, psi);
  }
}

/// Runs `count` independent jobs on up to `threads` workers. Each job writes
/// only its own slot, so results do not depend on scheduling.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job&& job) {
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Mean occupations over `n_traj` Pauli trajectories, with standard errors.
inline OccupationTrace trajectory_trace(const RingConfig& config, double t_max, int n_steps, bool with_vison,
                                        int n_traj, std::uint64_t seed, const NoisyOptions& options = {}) {
  config.validate();
  if (n_traj < 1) throw InputError("need at least one trajectory");
  const TrotterStepKernel step(config, t_max, n_steps);
  const double lambda = NoiseModel{config.gamma}.lambda(t_max / n_steps);
  const int L = config.L;
  const std::size_t rows = static_cast<std::size_t>(n_steps) + 1;
  const std::size_t width = static_cast<std::size_t>(L) + 1;
  auto recorder = [&](std::vector<double>& out) {
    out.assign(rows * width, 0.0);
    return [&out, L, width](int k, const StateVector& psi) {
      const auto n = spinon_expectations(psi, L);
      std::copy(n.begin(), n.end(), out.begin() + k * width);
      out[k * width + L] = vison_expectation(psi);
    };
  };

  // Weight of the error-free history, handled exactly when stratifying.
  const double p_error = 0.75 * lambda;
  const double p_clean = options.stratify ? std::pow(1.0 - p_error, static_cast<double>(L) * n_steps) : 0.0;
  std::vector<double> clean;
  if (p_clean > 0.0) detail::run_trajectory(step, L, with_vison, n_steps, 0.0, 0, recorder(clean));

  // Per trajectory: rows x (L occupations + <B>).
  std::vector<std::vector<double>> samples;
  if (p_clean < 1.0) {
    samples.resize(static_cast<std::size_t>(n_traj));
    detail::parallel_for(samples.size(), options.threads, [&](std::size_t j) {
      detail::run_trajectory(step, L, with_vison, n_steps, lambda, derive_seed(seed, j), recorder(samples[j]),
                             options.stratify);
    });
  }

  OccupationTrace trace;
  trace.labels = {with_vison, "trajectory", L, config.gamma, n_steps};
  const double dt = t_max / n_steps;
  const double count = static_cast<double>(samples.size());
  for (std::size_t k = 0; k < rows; ++k) {
    std::vector<double> mean(width, 0.0), sq(width, 0.0);
    for (const auto& s : samples) {
      for (std::size_t c = 0; c < width; ++c) mean[c] += s[k * width + c];
    }
    for (auto& m : mean) m = count > 0 ? m / count : 0.0;
    for (const auto& s : samples) {
      for (std::size_t c = 0; c < width; ++c) {
        const double dev = s[k * width + c] - mean[c];
        sq[c] += dev * dev;
      }
    }
    std::vector<double> se(L);
    for (int c = 0; c < L; ++c) {
      se[c] = count > 1 ? (1.0 - p_clean) * std::sqrt(sq[c] / (count - 1.0) / count) : 0.0;
    }
    if (p_clean > 0.0) {
      for (std::size_t c = 0; c < width; ++c) mean[c] = p_clean * clean[k * width + c] + (1.0 - p_clean) * mean[c];
    }
    const double vison = mean[L];
    mean.resize(L);
    trace.record(static_cast<double>(k) * dt, std::move(mean), vison);
    trace.occupation_stderr.push_back(std::move(se));
  }
  return trace;
}

/// Final-state Z-basis samples of the noisy benchmark circuit: from the
/// density-matrix diagonal when it fits, otherwise one bitstring per
/// trajectory.
inline ShotCounts shot_counts_noisy(const RingConfig& config, double t_max, int n_steps, bool with_vison,
                                    std::uint64_t shots, std::uint64_t seed, const NoisyOptions& options = {}) {
  config.validate();
  if (shots < 1) throw InputError("need at least one shot");
  if (config.gamma == 0.0) {
    StateVector psi = ghz_state(config.L, with_vison);
    const TrotterStepKernel step(config, t_max, n_steps);
    for (int k = 0; k < n_steps; ++k) step.apply(psi);
    return sample_shots(psi, shots, seed);
  }
  if (config.L <= DensityMatrix::kMaxQubits) {
    DensityMatrix rho(1);
    lindblad_trotter_trace(config, t_max, n_steps, with_vison, options, &rho);
    return sample_shots(rho, shots, seed);
  }
  const TrotterStepKernel step(config, t_max, n_steps);
  const double lambda = NoiseModel{config.gamma}.lambda(t_max / n_steps);
  std::vector<std::string> outcomes(shots);
  detail::parallel_for(outcomes.size(), options.threads, [&](std::size_t j) {
    const std::uint64_t traj_seed = derive_seed(seed, j);
    detail::run_trajectory(step, config.L, with_vison, n_steps, lambda, traj_seed,
                           [&](int k, const StateVector& psi) {
                             if (k != n_steps) return;
                             const auto one = sample_shots(psi, 1, mix64(traj_seed));
                             outcomes[j] = one.begin()->first;
                           });
  });
  ShotCounts counts;
  for (const auto& o : outcomes) ++counts[o];
  return counts;
}

}  // namespace qgrade
