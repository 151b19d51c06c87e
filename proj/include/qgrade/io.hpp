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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qgrade/errors.hpp"
#include "qgrade/format.hpp"
#include "qgrade/metrics.hpp"
#include "qgrade/ring_model.hpp"
#include "qgrade/statevector.hpp"

namespace qgrade::io {

inline constexpr const char* kToolkitVersion = "1.0.0";
inline constexpr const char* kRunSchema = "qgrade-run/1";
inline constexpr const char* kCountsSchema = "qgrade-counts/1";
inline constexpr const char* kCalibrationSchema = "qgrade-calibration/1";
inline constexpr const char* kReportSchema = "qgrade-report/1";

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(what + ": invalid JSON: " + e.what());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline void require_schema(const json& j, const char* schema, const std::string& what) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema) {
    throw SchemaError(what + ": expected schema tag '" + schema + "'");
  }
}

template <typename T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw SchemaError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(what + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Flat key-value config files
//
//   # comment
//   L = 8
//   gamma = 0.002
//
// Keys mirror RingConfig plus the CLI's run options (seed, backend, ...).

inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

// ---------------------------------------------------------------------------
// JSON mappings

inline json to_json(const RingConfig& c) {
  return json{{"L", c.L},         {"J", c.J},
              {"Gamma", c.Gamma}, {"gamma", c.gamma},
              {"twist_site", c.twist_site}, {"threshold", c.threshold},
              {"shots", c.shots}};
}

inline RingConfig ring_config_from_json(const json& j) {
  const std::string what = "config";
  RingConfig c;
  c.L = detail::field<int>(j, "L", what);
  c.J = detail::field<double>(j, "J", what);
  c.Gamma = detail::field<double>(j, "Gamma", what);
  c.gamma = detail::field<double>(j, "gamma", what);
  c.twist_site = detail::field<int>(j, "twist_site", what);
  c.threshold = detail::field<double>(j, "threshold", what);
  c.shots = detail::field<int>(j, "shots", what);
  c.validate();
  return c;
}

inline json to_json(const CalibrationRecord& r) {
  return json{{"L", r.L},         {"t_max", r.t_max},     {"n_opt", r.n_opt},   {"delta", r.delta},
              {"method", r.method}, {"n_v_0", r.n_v_0}, {"n_nov_0", r.n_nov_0}};
}

inline CalibrationRecord calibration_record_from_json(const json& j) {
  const std::string what = "calibration record";
  CalibrationRecord r;
  r.L = detail::field<int>(j, "L", what);
  r.t_max = detail::field<int>(j, "t_max", what);
  r.n_opt = detail::field<int>(j, "n_opt", what);
  r.delta = detail::field<double>(j, "delta", what);
  r.method = detail::field<std::string>(j, "method", what);
  r.n_v_0 = detail::field<double>(j, "n_v_0", what);
  r.n_nov_0 = detail::field<double>(j, "n_nov_0", what);
  if (r.t_max < 1 || r.n_opt < 1) throw SchemaError(what + ": t_max and n_opt must be >= 1");
  return r;
}

/// Calibration table for one (J, Gamma) setting.
struct Calibration {
  double J = 1.0;
  double Gamma = 0.1;
  double delta_threshold = 0.15;
  std::vector<CalibrationRecord> records;

  const CalibrationRecord* find(int L) const {
    for (const auto& r : records) {
      if (r.L == L) return &r;
    }
    return nullptr;
  }

  const CalibrationRecord& at(int L) const {
    if (const auto* r = find(L)) return *r;
    throw InputError("no calibration for L = " + std::to_string(L) + "; run `qgrade calibrate --L " +
                     std::to_string(L) + "` first");
  }

  void upsert(const CalibrationRecord& rec) {
    for (auto& r : records) {
      if (r.L == rec.L) {
        r = rec;
        return;
      }
    }
    records.push_back(rec);
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.L < b.L; });
  }
};

inline json to_json(const Calibration& c) {
  json recs = json::array();
  for (const auto& r : c.records) recs.push_back(to_json(r));
  return json{{"schema", kCalibrationSchema}, {"J", c.J},          {"Gamma", c.Gamma},
              {"delta_threshold", c.delta_threshold}, {"records", recs}};
}

inline Calibration calibration_from_json(const json& j) {
  detail::require_schema(j, kCalibrationSchema, "calibration");
  Calibration c;
  c.J = detail::field<double>(j, "J", "calibration");
  c.Gamma = detail::field<double>(j, "Gamma", "calibration");
  c.delta_threshold = detail::field<double>(j, "delta_threshold", "calibration");
  if (!j.contains("records") || !j["records"].is_array()) throw SchemaError("calibration: missing records array");
  for (const auto& r : j["records"]) c.records.push_back(calibration_record_from_json(r));
  return c;
}

// ---------------------------------------------------------------------------
// Counts interchange

enum class BitOrder { Q0First, Q0Last };

/// Measurement histogram of one benchmark circuit, e.g. from hardware.
struct CountsFile {
  std::string backend;
  int L = 0;
  bool with_vison = false;
  double t_max = 0.0;
  int n_steps = 0;
  std::uint64_t shots = 0;
  BitOrder bit_order = BitOrder::Q0First;
  ShotCounts counts;
  /// Filled by the parser when sum(counts) != shots.
  std::vector<std::string> warnings;

  /// Histogram with keys normalized to qubit 0 first.
  ShotCounts normalized_counts() const {
    if (bit_order == BitOrder::Q0First) return counts;
    ShotCounts out;
    for (const auto& [k, v] : counts) out[std::string(k.rbegin(), k.rend())] += v;
    return out;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : counts) t += v;
    return t;
  }
};

inline json to_json(const CountsFile& c) {
  json counts = json::object();
  for (const auto& [k, v] : c.counts) counts[k] = v;
  return json{{"schema", kCountsSchema},
              {"backend", c.backend},
              {"L", c.L},
              {"with_vison", c.with_vison},
              {"t_max", c.t_max},
              {"n_steps", c.n_steps},
              {"shots", c.shots},
              {"bit_order", c.bit_order == BitOrder::Q0First ? "q0-first" : "q0-last"},
              {"counts", counts}};
}

inline CountsFile counts_file_from_json(const json& j) {
  const std::string what = "counts file";
  detail::require_schema(j, kCountsSchema, what);
  CountsFile c;
  c.backend = detail::field<std::string>(j, "backend", what);
  c.L = detail::field<int>(j, "L", what);
  c.with_vison = detail::field<bool>(j, "with_vison", what);
  c.t_max = detail::field<double>(j, "t_max", what);
  c.n_steps = detail::field<int>(j, "n_steps", what);
  c.shots = detail::field<std::uint64_t>(j, "shots", what);
  const auto order = detail::field<std::string>(j, "bit_order", what);
  if (order == "q0-first") c.bit_order = BitOrder::Q0First;
  else if (order == "q0-last") c.bit_order = BitOrder::Q0Last;
  else throw SchemaError(what + ": bit_order must be 'q0-first' or 'q0-last', got '" + order + "'");
  if (c.L < 2 || c.L % 2 != 0) throw SchemaError(what + ": L must be even and >= 2");
  if (!j.contains("counts") || !j["counts"].is_object()) throw SchemaError(what + ": missing counts object");
  for (const auto& [key, value] : j["counts"].items()) {
    if (static_cast<int>(key.size()) != c.L || key.find_first_not_of("01") != std::string::npos) {
      throw SchemaError(what + ": key '" + key + "' is not a length-" + std::to_string(c.L) + " bitstring");
    }
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
      throw SchemaError(what + ": count for '" + key + "' must be a non-negative integer");
    }
    c.counts[key] = value.get<std::uint64_t>();
  }
  if (c.total() != c.shots) {
    c.warnings.push_back("counts sum to " + std::to_string(c.total()) + " but shots = " + std::to_string(c.shots) +
                         "; using the counts");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Run records

inline json to_json(const OccupationTrace& t) {
  json j{{"with_vison", t.labels.with_vison}, {"backend", t.labels.backend}, {"L", t.labels.L},
         {"gamma", t.labels.gamma},           {"n_steps", t.labels.n_steps}, {"times", t.times},
         {"occupations", t.occupations},      {"total", t.total},            {"vison", t.vison}};
  if (!t.occupation_stderr.empty()) j["occupation_stderr"] = t.occupation_stderr;
  return j;
}

struct RunRecord {
  RingConfig config;
  std::string backend;
  std::uint64_t seed = 0;
  CalibrationRecord calibration;
  RatioRow row;
  std::optional<OccupationTrace> trace_vison;
  std::optional<OccupationTrace> trace_no_vison;
  std::optional<std::string> timestamp;
};

inline json to_json(const RunRecord& r) {
  json j{{"schema", kRunSchema},
         {"toolkit_version", kToolkitVersion},
         {"config", to_json(r.config)},
         {"backend", r.backend},
         {"seed", r.seed},
         {"calibration", to_json(r.calibration)},
         {"site", bonds::detection_site(r.config.L)},
         {"n_v_gamma", r.row.n_v_gamma},
         {"n_nov_gamma", r.row.n_nov_gamma},
         {"n_v_0", r.row.n_v_0},
         {"n_nov_0", r.row.n_nov_0},
         {"R", r.row.R},
         {"dR", r.row.dR},
         {"shots", r.row.shots}};
  j["timestamp"] = r.timestamp ? json(*r.timestamp) : json(nullptr);
  if (r.trace_vison && r.trace_no_vison) {
    j["traces"] = json{{"vison", to_json(*r.trace_vison)}, {"no_vison", to_json(*r.trace_no_vison)}};
  }
  return j;
}

inline RunRecord run_record_from_json(const json& j) {
  const std::string what = "run record";
  detail::require_schema(j, kRunSchema, what);
  RunRecord r;
  if (!j.contains("config")) throw SchemaError(what + ": missing config");
  r.config = ring_config_from_json(j["config"]);
  r.backend = detail::field<std::string>(j, "backend", what);
  r.seed = detail::field<std::uint64_t>(j, "seed", what);
  if (!j.contains("calibration")) throw SchemaError(what + ": missing calibration");
  r.calibration = calibration_record_from_json(j["calibration"]);
  r.row.L = r.config.L;
  r.row.n_v_gamma = detail::field<double>(j, "n_v_gamma", what);
  r.row.n_nov_gamma = detail::field<double>(j, "n_nov_gamma", what);
  r.row.n_v_0 = detail::field<double>(j, "n_v_0", what);
  r.row.n_nov_0 = detail::field<double>(j, "n_nov_0", what);
  r.row.R = detail::field<double>(j, "R", what);
  r.row.dR = detail::field<double>(j, "dR", what);
  r.row.shots = detail::field<std::uint64_t>(j, "shots", what);
  if (j.contains("timestamp") && j["timestamp"].is_string()) r.timestamp = j["timestamp"].get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const RatioRow& r) {
  return json{{"L", r.L},           {"R", r.R},         {"dR", r.dR},         {"n_v_gamma", r.n_v_gamma},
              {"n_nov_gamma", r.n_nov_gamma}, {"n_v_0", r.n_v_0}, {"n_nov_0", r.n_nov_0}, {"shots", r.shots}};
}

inline RatioRow ratio_row_from_json(const json& j) {
  const std::string what = "report row";
  RatioRow r;
  r.L = detail::field<int>(j, "L", what);
  r.R = detail::field<double>(j, "R", what);
  r.dR = detail::field<double>(j, "dR", what);
  r.n_v_gamma = detail::field<double>(j, "n_v_gamma", what);
  r.n_nov_gamma = detail::field<double>(j, "n_nov_gamma", what);
  r.n_v_0 = detail::field<double>(j, "n_v_0", what);
  r.n_nov_0 = detail::field<double>(j, "n_nov_0", what);
  r.shots = detail::field<std::uint64_t>(j, "shots", what);
  return r;
}

inline json to_json(const QGradeReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  return json{{"schema", kReportSchema},
              {"toolkit_version", kToolkitVersion},
              {"label", rep.label},
              {"threshold", rep.threshold},
              {"exhaustive", rep.exhaustive},
              {"qgrade", rep.grade.str()},
              {"rows", rows},
              {"aggregation",
               "R is computed from pooled occupations per L; averaging R over repeated ingests is the alternative"}};
}

inline QGradeReport report_from_json(const json& j) {
  detail::require_schema(j, kReportSchema, "report");
  QGradeReport rep;
  rep.label = detail::field<std::string>(j, "label", "report");
  rep.threshold = detail::field<double>(j, "threshold", "report");
  rep.exhaustive = detail::field<bool>(j, "exhaustive", "report");
  for (const auto& r : j.at("rows")) rep.rows.push_back(ratio_row_from_json(r));
  rep.finalize();
  return rep;
}

/// "L,R,dR" table, one row per ring size.
inline std::string report_csv(const QGradeReport& rep) {
  std::string out = "L,R,dR\n";
  for (const auto& r : rep.rows) {
    out += std::to_string(r.L) + "," + format_double(r.R) + "," + format_double(r.dR) + "\n";
  }
  return out;
}

/// Columns for an R-vs-L plot with error bars and the threshold line.
inline json report_plot_data(const QGradeReport& rep) {
  json x = json::array(), y = json::array(), err = json::array();
  for (const auto& r : rep.rows) {
    x.push_back(r.L);
    y.push_back(r.R);
    err.push_back(r.dR);
  }
  return json{{"label", rep.label}, {"x", x}, {"y", y}, {"yerr", err}, {"threshold", rep.threshold},
              {"qgrade", rep.grade.str()}};
}

}  // namespace qgrade::io
