#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spinwell/dynamics.hpp"
#include "spinwell/model.hpp"
#include "spinwell/solver.hpp"

namespace spinwell::io {

using nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputOptions {
  std::string format = "csv";  // csv | json
  std::string path;
  int precision = 12;  // significant digits
};

struct SweepConfig {
  double omega_min = 0.0;
  double omega_max = 0.0;
  double omega_step = 0.0;
};

struct ThreeLevelConfig {
  ThreeLevelParams params;
  double t_final = 0.0;  // 0: default to the effective transfer time
  double dt = 0.0;       // 0: default step
};

struct TrapConfig {
  double barrier_hz = 0.0;  // V_b / (2 pi hbar)
  double mass_kg = 0.0;
  double x0_m = 0.0;                   // half the well separation
  std::optional<double> U_hz;          // U / (2 pi hbar)
  std::optional<int> N;
};

struct RunConfig {
  json raw;
  ModelParams model;
  bool has_model = false;
  std::optional<SweepConfig> sweep;
  std::optional<RampProtocol> ramp;
  std::vector<double> ramp_rates;  // v batch; singleton for a scalar v
  int sample_every = 0;            // 0: every 0.1/J of evolution time
  std::optional<ThreeLevelConfig> three_level;
  std::optional<TrapConfig> trap;
  SolverOptions solver;
  OutputOptions output;
};

namespace detail {

inline double require_number(const json& j, const std::string& block,
                             const std::string& key) {
  if (!j.contains(key))
    throw ConfigError("config: missing field " + block + "." + key);
  if (!j[key].is_number())
    throw ConfigError("config: field " + block + "." + key +
                      " must be a number");
  return j[key].get<double>();
}

inline double number_or(const json& j, const std::string& block,
                        const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError("config: field " + block + "." + key +
                      " must be a number");
  return j[key].get<double>();
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  RunConfig cfg;
  cfg.raw = j;

  if (j.contains("model")) {
    const json& m = j["model"];
    if (!m.contains("units") || !m["units"].is_string())
      throw ConfigError(
          "config: model.units must declare the energy unit (\"J\" or "
          "\"absolute\")");
    const std::string units = m["units"].get<std::string>();
    const double n = detail::require_number(m, "model", "N");
    if (n < 0 || n != std::floor(n))
      throw ConfigError("config: model.N must be a non-negative integer");
    cfg.model.N = static_cast<int>(n);
    if (units == "J") {
      cfg.model.J = 1.0;
      if (m.contains("J") && m["J"].get<double>() != 1.0)
        throw ConfigError(
            "config: model.units == \"J\" pins J = 1; use units == "
            "\"absolute\" to override");
    } else if (units == "absolute") {
      cfg.model.J = detail::require_number(m, "model", "J");
    } else {
      throw ConfigError("config: model.units must be \"J\" or \"absolute\"");
    }
    cfg.model.U = detail::number_or(m, "model", "U", 0.0);
    cfg.model.Delta = detail::number_or(m, "model", "Delta", 0.0);
    cfg.model.validate();
    cfg.has_model = true;
  }

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    SweepConfig sw;
    sw.omega_min = detail::require_number(s, "sweep", "omega_min");
    sw.omega_max = detail::require_number(s, "sweep", "omega_max");
    sw.omega_step = detail::require_number(s, "sweep", "omega_step");
    cfg.sweep = sw;
  }

  if (j.contains("ramp")) {
    const json& r = j["ramp"];
    RampProtocol proto;
    if (!r.contains("v"))
      throw ConfigError("config: missing field ramp.v");
    if (r["v"].is_array()) {
      for (const auto& e : r["v"]) {
        if (!e.is_number())
          throw ConfigError("config: ramp.v entries must be numbers");
        cfg.ramp_rates.push_back(e.get<double>());
      }
      if (cfg.ramp_rates.empty())
        throw ConfigError("config: ramp.v batch is empty");
    } else if (r["v"].is_number()) {
      cfg.ramp_rates.push_back(r["v"].get<double>());
    } else {
      throw ConfigError("config: ramp.v must be a number or array");
    }
    proto.v = cfg.ramp_rates.front();
    proto.v_prime = detail::number_or(r, "ramp", "v_prime", 0.0);
    proto.t_final = detail::require_number(r, "ramp", "t_final");
    proto.dt = detail::number_or(r, "ramp", "dt", 1e-3);
    proto.validate();
    const double stride = detail::number_or(r, "ramp", "sample_every", 0.0);
    if (stride < 0 || stride != std::floor(stride))
      throw ConfigError("config: ramp.sample_every must be a non-negative "
                        "integer step count");
    cfg.sample_every = static_cast<int>(stride);
    cfg.ramp = proto;
  }

  if (j.contains("three_level")) {
    const json& t = j["three_level"];
    ThreeLevelConfig tl;
    tl.params.Omega_g = detail::require_number(t, "three_level", "Omega_g");
    tl.params.Omega_e = detail::require_number(t, "three_level", "Omega_e");
    tl.params.Delta_r = detail::require_number(t, "three_level", "Delta_r");
    tl.params.Delta_e = detail::number_or(t, "three_level", "Delta_e", 0.0);
    tl.t_final = detail::number_or(t, "three_level", "t_final", 0.0);
    tl.dt = detail::number_or(t, "three_level", "dt", 0.0);
    cfg.three_level = tl;
  }

  if (j.contains("trap")) {
    const json& t = j["trap"];
    TrapConfig tr;
    tr.barrier_hz = detail::require_number(t, "trap", "barrier_hz");
    tr.mass_kg = detail::require_number(t, "trap", "mass_kg");
    tr.x0_m = detail::require_number(t, "trap", "x0_m");
    if (t.contains("U_hz")) tr.U_hz = detail::require_number(t, "trap", "U_hz");
    if (t.contains("N")) {
      const double n = detail::require_number(t, "trap", "N");
      if (n < 0 || n != std::floor(n))
        throw ConfigError("config: trap.N must be a non-negative integer");
      tr.N = static_cast<int>(n);
    }
    cfg.trap = tr;
  }

  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.dense_threshold = static_cast<Eigen::Index>(
        detail::number_or(s, "solver", "dense_threshold", 2000.0));
    cfg.solver.residual_tol =
        detail::number_or(s, "solver", "residual_tol", 1e-11);
    cfg.solver.max_iterations = static_cast<int>(
        detail::number_or(s, "solver", "max_iterations", 10000.0));
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    if (o.contains("format")) cfg.output.format = o["format"].get<std::string>();
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      throw ConfigError("config: output.format must be \"csv\" or \"json\"");
    if (o.contains("path")) cfg.output.path = o["path"].get<std::string>();
    cfg.output.precision = static_cast<int>(
        detail::number_or(o, "output", "precision", 12.0));
    if (cfg.output.precision < 1 || cfg.output.precision > 17)
      throw ConfigError("config: output.precision must be in 1..17");
  }

  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash_hex(const json& raw) {
  const std::uint64_t h = fnv1a64(raw.dump());
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i)
    buf[15 - i] = digits[(h >> (4 * i)) & 0xf];
  buf[16] = '\0';
  return buf;
}

// Locale-independent shortest-faithful formatting at a fixed number of
// significant digits; byte-identical across runs.
inline std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_table(const std::string& path, const Table& table,
                        const std::string& config_hash,
                        const OutputOptions& opt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot open " + path);
  if (opt.format == "csv") {
    out << "# config_hash=" << config_hash << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows)
      for (std::size_t c = 0; c < row.size(); ++c)
        out << format_double(row[c], opt.precision)
            << (c + 1 < row.size() ? "," : "\n");
  } else {
    json doc;
    doc["config_hash"] = config_hash;
    doc["columns"] = table.columns;
    json rows = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (double v : row) {
        if (std::isnan(v))
          r.push_back(nullptr);
        else
          r.push_back(v);
      }
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(1) << "\n";
  }
  if (!out) throw ConfigError("output: write failed for " + path);
}

inline void write_json_report(const std::string& path, json report,
                              const std::string& config_hash) {
  report["config_hash"] = config_hash;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot open " + path);
  out << report.dump(1) << "\n";
  if (!out) throw ConfigError("output: write failed for " + path);
}

// Run metadata lives next to the data file, never inside it, so data stays
// byte-identical across reruns.
inline void write_sidecar(const std::string& data_path, json meta) {
  std::ofstream out(data_path + ".meta.json", std::ios::binary);
  if (!out)
    throw ConfigError("output: cannot open " + data_path + ".meta.json");
  out << meta.dump(1) << "\n";
}

}  // namespace spinwell::io
