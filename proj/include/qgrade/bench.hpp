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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qgrade/io.hpp"
#include "qgrade/metrics.hpp"
#include "qgrade/noisy.hpp"
#include "qgrade/statevector.hpp"

// End-to-end benchmark workflows shared by the command-line driver and tests.
namespace qgrade::bench {

enum class Backend { StateVector, DensityMatrix, Trajectory };

inline std::string backend_name(Backend b) {
  switch (b) {
    case Backend::StateVector: return "statevector";
    case Backend::DensityMatrix: return "density-matrix";
    case Backend::Trajectory: return "trajectory";
  }
  return "statevector";
}

inline Backend parse_backend(const std::string& name) {
  if (name == "statevector") return Backend::StateVector;
  if (name == "density-matrix") return Backend::DensityMatrix;
  if (name == "trajectory") return Backend::Trajectory;
  throw InputError("unknown backend '" + name + "' (expected statevector, density-matrix or trajectory)");
}

/// Stored record for config.L when it matches (J, Gamma), else a fresh one.
inline CalibrationRecord resolve_calibration(const RingConfig& config, const io::Calibration* stored,
                                             double delta_threshold = 0.15) {
  if (stored && stored->J == config.J && stored->Gamma == config.Gamma) {
    if (const auto* rec = stored->find(config.L)) return *rec;
  }
  return calibrate(config, delta_threshold);
}

struct SimulateOptions {
  Backend backend = Backend::DensityMatrix;
  std::uint64_t seed = 0;
  int trajectories = 1000;
  bool include_traces = true;
  NoisyOptions noisy;
};

inline OccupationTrace run_branch(const RingConfig& config, const CalibrationRecord& cal, bool with_vison,
                                  const SimulateOptions& opt) {
  const double t_max = cal.t_max;
  switch (opt.backend) {
    case Backend::StateVector:
      if (config.gamma != 0.0) {
        throw InputError("the statevector backend is noiseless; use density-matrix or trajectory for gamma > 0");
      }
      return trotter_trace(config, t_max, cal.n_opt, with_vison);
    case Backend::DensityMatrix:
      if (config.L > DensityMatrix::kMaxQubits) {
        throw CapacityError("L = " + std::to_string(config.L) + " exceeds the density-matrix limit of " +
                            std::to_string(DensityMatrix::kMaxQubits) + " qubits; use the trajectory backend");
      }
      return lindblad_trotter_trace(config, t_max, cal.n_opt, with_vison, opt.noisy);
    case Backend::Trajectory:
      // Both branches draw the same error histories, which correlates their
      // fluctuations and tightens the difference that R is built from.
      return trajectory_trace(config, t_max, cal.n_opt, with_vison, opt.trajectories, opt.seed, opt.noisy);
  }
  throw InputError("unknown backend");
}

/// Both branches at the calibrated (t_max, N_opt), graded at site L/2.
inline io::RunRecord simulate(const RingConfig& config, const CalibrationRecord& cal, const SimulateOptions& opt) {
  config.validate();
  if (cal.L != config.L) throw InputError("calibration is for L = " + std::to_string(cal.L));
  const int site = bonds::detection_site(config.L);
  auto with = run_branch(config, cal, true, opt);
  auto without = run_branch(config, cal, false, opt);
  io::RunRecord rec;
  rec.config = config;
  rec.backend = backend_name(opt.backend);
  rec.seed = opt.seed;
  rec.calibration = cal;
  rec.row = make_ratio_row(config.L, with.final_site(site), without.final_site(site), cal.n_v_0, cal.n_nov_0,
                           static_cast<std::uint64_t>(config.shots));
  if (opt.include_traces) {
    rec.trace_vison = std::move(with);
    rec.trace_no_vison = std::move(without);
  }
  return rec;
}

/// Synthetic hardware histogram for one branch of the calibrated circuit.
inline io::CountsFile synthesize_counts(const RingConfig& config, const CalibrationRecord& cal, bool with_vison,
                                        std::uint64_t seed, const NoisyOptions& noisy = {}) {
  io::CountsFile f;
  f.backend = config.gamma == 0.0 ? "emulator-statevector" : "emulator-noisy";
  f.L = config.L;
  f.with_vison = with_vison;
  f.t_max = cal.t_max;
  f.n_steps = cal.n_opt;
  f.shots = static_cast<std::uint64_t>(config.shots);
  f.bit_order = io::BitOrder::Q0First;
  f.counts = shot_counts_noisy(config, cal.t_max, cal.n_opt, with_vison, f.shots,
                               derive_seed(seed, with_vison ? 0 : 1), noisy);
  return f;
}

/// Pools histograms per (L, branch) and grades them against the stored
/// noiseless references. Shot-count mismatches are reported as warnings.
inline std::vector<RatioRow> ingest(const std::vector<io::CountsFile>& files, const io::Calibration& calibration,
                                    std::vector<std::string>* warnings = nullptr) {
  if (files.empty()) throw InputError("no counts files to ingest");
  struct Pool {
    ShotCounts counts[2];
    double t_max = -1;
    int n_steps = -1;
  };
  std::map<int, Pool> pools;
  for (const auto& f : files) {
    if (warnings) {
      for (const auto& w : f.warnings) warnings->push_back("L = " + std::to_string(f.L) + ": " + w);
    }
    Pool& p = pools[f.L];
    if (p.n_steps < 0) {
      p.t_max = f.t_max;
      p.n_steps = f.n_steps;
    } else if (p.t_max != f.t_max || p.n_steps != f.n_steps) {
      throw ProtocolError("counts for L = " + std::to_string(f.L) + " disagree on t_max or n_steps");
    }
    for (const auto& [k, v] : f.normalized_counts()) p.counts[f.with_vison ? 0 : 1][k] += v;
  }
  std::vector<RatioRow> rows;
  for (const auto& [L, p] : pools) {
    if (p.counts[0].empty() || p.counts[1].empty()) {
      throw ProtocolError("L = " + std::to_string(L) + " needs both a vison and a no-vison counts file");
    }
    const auto* cal = calibration.find(L);
    if (!cal) {
      throw ProtocolError("no noiseless reference for L = " + std::to_string(L) + "; run `qgrade calibrate --L " +
                          std::to_string(L) + "` first");
    }
    if (cal->t_max != p.t_max || cal->n_opt != p.n_steps) {
      throw ProtocolError("counts for L = " + std::to_string(L) + " use t_max = " + format_double(p.t_max) +
                          ", n_steps = " + std::to_string(p.n_steps) + " but the calibration has t_max = " +
                          std::to_string(cal->t_max) + ", n_steps = " + std::to_string(cal->n_opt));
    }
    const int site = bonds::detection_site(L);
    const double n_v = occupations_from_counts(p.counts[0], L)[site];
    const double n_nov = occupations_from_counts(p.counts[1], L)[site];
    std::uint64_t shots_v = 0, shots_nov = 0;
    for (const auto& [k, v] : p.counts[0]) shots_v += v;
    for (const auto& [k, v] : p.counts[1]) shots_nov += v;
    rows.push_back(make_ratio_row(L, n_v, n_nov, cal->n_v_0, cal->n_nov_0, std::min(shots_v, shots_nov)));
  }
  return rows;
}

/// Report over run records; records sharing an L are pooled with shot weights.
inline QGradeReport report_from_runs(const std::vector<io::RunRecord>& runs, double threshold,
                                     const std::string& label, bool exhaustive = false) {
  if (runs.empty()) throw InputError("report needs at least one run record");
  struct Acc {
    double w = 0, v = 0, nov = 0, v0 = 0, nov0 = 0;
    std::uint64_t shots = 0;
  };
  std::map<int, Acc> acc;
  for (const auto& r : runs) {
    Acc& a = acc[r.config.L];
    if (a.shots > 0 && (a.v0 != r.row.n_v_0 || a.nov0 != r.row.n_nov_0)) {
      throw ProtocolError("run records for L = " + std::to_string(r.config.L) + " use different references");
    }
    const double w = static_cast<double>(r.row.shots);
    a.w += w;
    a.v += w * r.row.n_v_gamma;
    a.nov += w * r.row.n_nov_gamma;
    a.v0 = r.row.n_v_0;
    a.nov0 = r.row.n_nov_0;
    a.shots += r.row.shots;
  }
  QGradeReport rep;
  rep.label = label;
  rep.threshold = threshold;
  rep.exhaustive = exhaustive;
  for (const auto& [L, a] : acc) rep.rows.push_back(make_ratio_row(L, a.v / a.w, a.nov / a.w, a.v0, a.nov0, a.shots));
  rep.finalize();
  return rep;
}

}  // namespace qgrade::bench
