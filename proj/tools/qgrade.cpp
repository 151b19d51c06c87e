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

// qgrade: command-line driver for the many-body coherence benchmark.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qgrade/bench.hpp"
#include "qgrade/circuit.hpp"
#include "qgrade/io.hpp"
#include "qgrade/qasm.hpp"

namespace fs = std::filesystem;
using namespace qgrade;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> L;
  std::vector<std::string> gamma;
  double J = 1.0;
  double Gamma = 0.1;
  std::string backend = "density-matrix";
  int shots = 0;  // 0: default for the ring size
  std::uint64_t seed = 0;
  double threshold = 0.2;
  double delta_threshold = 0.15;
  int trajectories = 1000;
  unsigned threads = 0;
  std::string out;
  std::string config;
  std::string calibration = "qgrade_calibration.json";
  std::string label;
  int qasm_version = 3;
  bool no_traces = false;
  bool stamp = false;
  bool exhaustive = false;
  bool monitor = false;
  std::string counts_out;
  std::vector<std::string> inputs;
};

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + " '" + s + "'");
  }
}

std::vector<std::string> split_list(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  for (const auto& a : args) {
    std::string cur;
    for (char ch : a) {
      if (ch == ',' || ch == ' ') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

// "4,6,8" or "4:12" (even sizes, inclusive).
std::vector<int> ring_sizes(const std::vector<std::string>& args, int min_L) {
  std::vector<int> out;
  for (const auto& tok : split_list(args)) {
    if (const auto colon = tok.find(':'); colon != std::string::npos) {
      const int lo = parse_int(tok.substr(0, colon), "L range");
      const int hi = parse_int(tok.substr(colon + 1), "L range");
      if (lo % 2 != 0 || hi % 2 != 0 || hi < lo) throw UsageError("L range must be even and ascending: " + tok);
      for (int L = lo; L <= hi; L += 2) out.push_back(L);
    } else {
      out.push_back(parse_int(tok, "L"));
    }
  }
  if (out.empty()) throw UsageError("--L is required");
  for (int L : out) {
    if (L % 2 != 0 || L < min_L) {
      throw UsageError("L must be even and >= " + std::to_string(min_L) + ", got " + std::to_string(L));
    }
  }
  return out;
}

std::vector<double> gammas(const std::vector<std::string>& args) {
  std::vector<double> out;
  for (const auto& tok : split_list(args)) out.push_back(parse_double(tok, "gamma"));
  if (out.empty()) out.push_back(0.0);
  return out;
}

// Values from --config fill in every option not given on the command line.
void apply_config_file(const Options& cli, Options& o, CLI::App& sub) {
  if (cli.config.empty()) return;
  const auto kv = io::parse_config_text(io::read_file(cli.config));
  auto unset = [&](const std::string& flag) {
    try {
      return sub.get_option("--" + flag)->count() == 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };
  for (const auto& [key, value] : kv) {
    if (key == "L") {
      if (unset("L")) o.L = {value};
    } else if (key == "gamma") {
      if (unset("gamma")) o.gamma = {value};
    } else if (key == "J") {
      if (unset("J")) o.J = parse_double(value, key);
    } else if (key == "Gamma") {
      if (unset("Gamma")) o.Gamma = parse_double(value, key);
    } else if (key == "backend") {
      if (unset("backend")) o.backend = value;
    } else if (key == "shots") {
      if (unset("shots")) o.shots = parse_int(value, key);
    } else if (key == "seed") {
      if (unset("seed")) o.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "threshold") {
      if (unset("threshold")) o.threshold = parse_double(value, key);
    } else if (key == "delta_threshold") {
      if (unset("delta-threshold")) o.delta_threshold = parse_double(value, key);
    } else if (key == "trajectories") {
      if (unset("trajectories")) o.trajectories = parse_int(value, key);
    } else if (key == "calibration") {
      if (unset("calibration")) o.calibration = value;
    } else if (key == "twist_site") {
      if (parse_int(value, key) != 0) throw UsageError("twist_site is fixed to 0");
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
}

RingConfig ring_config(const Options& o, int L, double gamma) {
  RingConfig c;
  c.L = L;
  c.J = o.J;
  c.Gamma = o.Gamma;
  c.gamma = gamma;
  c.threshold = o.threshold;
  c.shots = o.shots > 0 ? o.shots : RingConfig::default_shots(L);
  c.validate();
  return c;
}

std::optional<io::Calibration> load_calibration(const std::string& path) {
  if (path.empty() || !fs::exists(path)) return std::nullopt;
  return io::calibration_from_json(io::parse_json(io::read_file(path), path));
}

std::optional<std::string> utc_stamp(bool enabled) {
  if (!enabled) return std::nullopt;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string format_gamma_tag(double g) { return "g" + format_double(g); }

// Report artifacts share a stem: <stem>.json, <stem>.csv, <stem>.plot.json.
void write_report(const QGradeReport& rep, std::string stem) {
  if (stem.size() > 5 && stem.ends_with(".json")) stem.resize(stem.size() - 5);
  io::write_file_atomic(stem + ".json", io::dump(io::to_json(rep)));
  io::write_file_atomic(stem + ".csv", io::report_csv(rep));
  io::write_file_atomic(stem + ".plot.json", io::dump(io::report_plot_data(rep)));
  std::cout << rep.label << ": Q-grade " << rep.grade.str() << " at threshold " << format_double(rep.threshold)
            << "\n";
  for (const auto& r : rep.rows) {
    std::cout << "  L=" << r.L << " R=" << format_double(r.R) << " dR=" << format_double(r.dR) << "\n";
  }
}

bench::SimulateOptions simulate_options(const Options& o) {
  bench::SimulateOptions s;
  s.backend = bench::parse_backend(o.backend);
  s.seed = o.seed;
  s.trajectories = o.trajectories;
  s.include_traces = !o.no_traces;
  s.noisy.threads = o.threads;
  s.noisy.monitor_physicality = o.monitor;
  return s;
}

// ---------------------------------------------------------------------------

int cmd_calibrate(const Options& o) {
  const auto sizes = ring_sizes(o.L, 4);
  const std::string out = o.out.empty() ? o.calibration : o.out;
  io::Calibration cal;
  if (auto existing = load_calibration(out); existing && existing->J == o.J && existing->Gamma == o.Gamma &&
                                             existing->delta_threshold == o.delta_threshold) {
    cal = *existing;
  }
  cal.J = o.J;
  cal.Gamma = o.Gamma;
  cal.delta_threshold = o.delta_threshold;
  for (int L : sizes) {
    RingConfig c = ring_config(o, L, 0.0);
    CalibrationRecord rec;
    try {
      rec = calibrate(c, o.delta_threshold);
    } catch (const CapacityError& e) {
      throw CapacityError("L = " + std::to_string(L) + ": " + e.what());
    }
    std::cout << "L=" << L << " t_max=" << rec.t_max << " N_opt=" << rec.n_opt << " delta=" << format_double(rec.delta)
              << "\n";
    cal.upsert(rec);
  }
  io::write_file_atomic(out, io::dump(io::to_json(cal)));
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto sizes = ring_sizes(o.L, 4);
  if (sizes.size() != 1) throw UsageError("simulate takes a single L; use sweep for several");
  const auto gs = gammas(o.gamma);
  if (gs.size() != 1) throw UsageError("simulate takes a single gamma; use sweep for several");
  const RingConfig c = ring_config(o, sizes[0], gs[0]);
  const auto stored = load_calibration(o.calibration);
  const CalibrationRecord cal = bench::resolve_calibration(c, stored ? &*stored : nullptr, o.delta_threshold);
  io::RunRecord rec = bench::simulate(c, cal, simulate_options(o));
  rec.timestamp = utc_stamp(o.stamp);
  const std::string out = o.out.empty() ? "qgrade_run_L" + std::to_string(c.L) + "_" + format_gamma_tag(c.gamma) + ".json" : o.out;
  io::write_file_atomic(out, io::dump(io::to_json(rec)));
  std::cout << "L=" << c.L << " gamma=" << format_double(c.gamma) << " backend=" << rec.backend
            << " R=" << format_double(rec.row.R) << " dR=" << format_double(rec.row.dR) << "\n";
  if (!o.counts_out.empty()) {
    NoisyOptions noisy;
    noisy.threads = o.threads;
    for (bool vison : {true, false}) {
      const auto counts = bench::synthesize_counts(c, cal, vison, o.seed, noisy);
      const fs::path path = fs::path(o.counts_out) / ("qgrade_L" + std::to_string(c.L) + "_" +
                                                      (vison ? "vison" : "novison") + ".counts.json");
      io::write_file_atomic(path, io::dump(io::to_json(counts)));
    }
  }
  return 0;
}

int cmd_sweep(const Options& o) {
  const auto sizes = ring_sizes(o.L, 4);
  const auto gs = gammas(o.gamma);
  const fs::path dir = o.out.empty() ? fs::path("qgrade_sweep") : fs::path(o.out);
  auto stored = load_calibration(o.calibration);
  bench::SimulateOptions base = simulate_options(o);
  std::uint64_t job = 0;
  for (double g : gs) {
    std::vector<io::RunRecord> runs;
    for (int L : sizes) {
      const RingConfig c = ring_config(o, L, g);
      const CalibrationRecord cal = bench::resolve_calibration(c, stored ? &*stored : nullptr, o.delta_threshold);
      bench::SimulateOptions s = base;
      s.seed = derive_seed(o.seed, job++);
      io::RunRecord rec = bench::simulate(c, cal, s);
      rec.timestamp = utc_stamp(o.stamp);
      io::write_file_atomic(dir / ("run_L" + std::to_string(L) + "_" + format_gamma_tag(g) + ".json"),
                            io::dump(io::to_json(rec)));
      runs.push_back(std::move(rec));
    }
    const std::string label =
        (o.label.empty() ? bench::backend_name(base.backend) : o.label) + " gamma=" + format_double(g);
    const auto rep = bench::report_from_runs(runs, o.threshold, label, o.exhaustive);
    write_report(rep, (dir / ("report_" + format_gamma_tag(g))).string());
  }
  return 0;
}

int cmd_export_qasm(const Options& o) {
  const auto sizes = ring_sizes(o.L, 4);
  if (o.qasm_version != 2 && o.qasm_version != 3) throw UsageError("--qasm-version must be 2 or 3");
  const auto stored = load_calibration(o.calibration);
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  for (int L : sizes) {
    const RingConfig c = ring_config(o, L, 0.0);
    const CalibrationRecord cal = bench::resolve_calibration(c, stored ? &*stored : nullptr, o.delta_threshold);
    for (bool vison : {true, false}) {
      const Circuit circ = build_full_circuit(c, cal.t_max, cal.n_opt, vison);
      const fs::path path = dir / qasm_file_name(L, cal.n_opt, vison);
      io::write_file_atomic(path, export_qasm(circ, static_cast<QasmVersion>(o.qasm_version)));
      std::cout << path.string() << ": " << circ.size() << " gates, " << circ.count(GateKind::CNOT) << " CNOT\n";
    }
  }
  return 0;
}

int cmd_ingest(const Options& o) {
  if (o.inputs.empty()) throw UsageError("ingest needs counts files");
  const auto stored = load_calibration(o.calibration);
  if (!stored) {
    throw ProtocolError("no calibration at '" + o.calibration + "'; run `qgrade calibrate` first");
  }
  std::vector<io::CountsFile> files;
  for (const auto& path : o.inputs) {
    try {
      files.push_back(io::counts_file_from_json(io::parse_json(io::read_file(path), path)));
    } catch (const SchemaError& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }
  std::vector<std::string> warnings;
  QGradeReport rep;
  rep.rows = bench::ingest(files, *stored, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  rep.label = o.label.empty() ? "ingested" : o.label;
  rep.threshold = o.threshold;
  rep.exhaustive = o.exhaustive;
  rep.finalize();
  write_report(rep, o.out.empty() ? "qgrade_report" : o.out);
  return 0;
}

int cmd_report(const Options& o) {
  if (o.inputs.empty()) throw UsageError("report needs run records or reports");
  std::vector<io::RunRecord> runs;
  std::vector<RatioRow> rows;
  for (const auto& path : o.inputs) {
    const auto j = io::parse_json(io::read_file(path), path);
    const std::string schema = j.is_object() && j.contains("schema") && j["schema"].is_string()
                                   ? j["schema"].get<std::string>()
                                   : std::string{};
    if (schema == io::kRunSchema) {
      runs.push_back(io::run_record_from_json(j));
    } else if (schema == io::kReportSchema) {
      const auto r = io::report_from_json(j);
      rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    } else {
      throw SchemaError(path + ": not a run record or report");
    }
  }
  const std::string label = o.label.empty() ? "report" : o.label;
  QGradeReport rep;
  if (!runs.empty()) rep = bench::report_from_runs(runs, o.threshold, label, o.exhaustive);
  for (const auto& r : rows) {
    for (const auto& existing : rep.rows) {
      if (existing.L == r.L) throw ProtocolError("duplicate row for L = " + std::to_string(r.L));
    }
    rep.rows.push_back(r);
  }
  rep.label = label;
  rep.threshold = o.threshold;
  rep.exhaustive = o.exhaustive;
  rep.finalize();
  write_report(rep, o.out.empty() ? "qgrade_report" : o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qgrade: many-body coherence benchmark for Ising-ring circuits"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "Flat key = value file; flags override it");
    s->add_option("--out", o.out, "Output file, directory or stem");
    s->add_option("--J", o.J, "Ising coupling");
    s->add_option("--Gamma", o.Gamma, "Transverse field");
    s->add_option("--threshold", o.threshold, "Q-grade threshold on R");
    s->add_option("--delta-threshold", o.delta_threshold, "Trotter-error threshold for N_opt");
    s->add_option("--calibration", o.calibration, "Calibration JSON")->capture_default_str();
  };
  auto add_run = [&](CLI::App* s) {
    s->add_option("--gamma", o.gamma, "Depolarizing rate(s)");
    s->add_option("--backend", o.backend, "statevector | density-matrix | trajectory")->capture_default_str();
    s->add_option("--shots", o.shots, "Shots per branch (default 1000, 2000 above L = 16)");
    s->add_option("--seed", o.seed, "Base RNG seed");
    s->add_option("--trajectories", o.trajectories, "Trajectories per branch")->capture_default_str();
    s->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    s->add_flag("--no-traces", o.no_traces, "Omit occupation traces from run records");
    s->add_flag("--monitor", o.monitor, "Check density-matrix physicality after every step");
    s->add_flag("--stamp", o.stamp, "Record a UTC timestamp (artifacts are then not reproducible)");
  };

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Find t_max and N_opt per ring size");
  calibrate_cmd->add_option("--L", o.L, "Ring sizes, e.g. 4,6,8 or 4:12");
  add_common(calibrate_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Run both branches at one (L, gamma)");
  simulate_cmd->add_option("--L", o.L, "Ring size");
  simulate_cmd->add_option("--counts-out", o.counts_out, "Also write synthetic counts files to this directory");
  add_common(simulate_cmd);
  add_run(simulate_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "Simulate over ring sizes and rates, then grade");
  sweep_cmd->add_option("--L", o.L, "Ring sizes, e.g. 4:12");
  sweep_cmd->add_option("--label", o.label, "Report label prefix");
  sweep_cmd->add_flag("--exhaustive", o.exhaustive, "Report 'unbounded' when every size passes");
  add_common(sweep_cmd);
  add_run(sweep_cmd);

  auto* qasm_cmd = app.add_subcommand("export-qasm", "Write the vison and no-vison circuits as OpenQASM");
  qasm_cmd->add_option("--L", o.L, "Ring sizes");
  qasm_cmd->add_option("--qasm-version", o.qasm_version, "2 or 3")->capture_default_str();
  add_common(qasm_cmd);

  auto* ingest_cmd = app.add_subcommand("ingest", "Grade hardware counts files");
  ingest_cmd->add_option("counts", o.inputs, "qgrade-counts/1 files")->required();
  ingest_cmd->add_option("--label", o.label, "Report label");
  ingest_cmd->add_flag("--exhaustive", o.exhaustive, "Report 'unbounded' when every size passes");
  add_common(ingest_cmd);

  auto* report_cmd = app.add_subcommand("report", "Combine run records or reports into a Q-grade report");
  report_cmd->add_option("inputs", o.inputs, "qgrade-run/1 or qgrade-report/1 files")->required();
  report_cmd->add_option("--label", o.label, "Report label");
  report_cmd->add_flag("--exhaustive", o.exhaustive, "Report 'unbounded' when every size passes");
  add_common(report_cmd);

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  try {
    const Options cli = o;
    apply_config_file(cli, o, *sub);
    const std::string name = sub->get_name();
    if (name == "calibrate") return cmd_calibrate(o);
    if (name == "simulate") return cmd_simulate(o);
    if (name == "sweep") return cmd_sweep(o);
    if (name == "export-qasm") return cmd_export_qasm(o);
    if (name == "ingest") return cmd_ingest(o);
    if (name == "report") return cmd_report(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
