// Command-line front end: one subcommand per result family, JSON config in,
// deterministic CSV/JSON tables out.

#include <chrono>
#include <clocale>
#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinwell/io.hpp"
#include "spinwell/spinwell.hpp"

namespace {

using nlohmann::json;
using namespace spinwell;

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::string format;
  unsigned threads = 0;
  bool self_test = false;
};

unsigned resolve_threads(const CliOptions& cli) {
  if (cli.threads > 0) return cli.threads;
  if (const char* env = std::getenv("SPINWELL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

io::RunConfig load(const CliOptions& cli) {
  if (cli.config_path.empty())
    throw io::ConfigError("--config <path> is required");
  io::RunConfig cfg = io::load_config(cli.config_path);
  if (!cli.out_path.empty()) cfg.output.path = cli.out_path;
  if (!cli.format.empty()) {
    if (cli.format != "csv" && cli.format != "json")
      throw io::ConfigError("--format must be csv or json");
    cfg.output.format = cli.format;
  }
  if (cfg.output.path.empty())
    throw io::ConfigError("no output path: set output.path or pass --out");
  return cfg;
}

json sidecar_meta(const io::RunConfig& cfg, const std::string& subcommand,
                  unsigned threads, double elapsed_s) {
  json meta;
  meta["subcommand"] = subcommand;
  meta["config_hash"] = io::config_hash_hex(cfg.raw);
  meta["config"] = cfg.raw;
  meta["threads"] = threads;
  meta["elapsed_seconds"] = elapsed_s;
  const auto now = std::chrono::system_clock::now();
  meta["generated_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
          .count();
  return meta;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

int sample_stride(const io::RunConfig& cfg, const RampProtocol& proto) {
  if (cfg.sample_every > 0) return cfg.sample_every;
  return std::max(1, static_cast<int>(std::lround(0.1 / proto.dt)));
}

void run_ground_sweep(const CliOptions& cli) {
  const Stopwatch watch;
  const io::RunConfig cfg = load(cli);
  if (!cfg.has_model) throw io::ConfigError("ground-sweep: model block required");
  if (!cfg.sweep) throw io::ConfigError("ground-sweep: sweep block required");
  const auto grid = linear_grid(cfg.sweep->omega_min, cfg.sweep->omega_max,
                                cfg.sweep->omega_step);
  const unsigned threads = resolve_threads(cli);

  const Basis basis(cfg.model.N);
  const SparseHermitian h = assemble(basis);
  const SweepTable table =
      sweep_ground(basis, h, cfg.model, grid, cfg.solver, threads);

  std::size_t narrow_gaps = 0;
  for (const auto& row : table)
    if (row.gap < 1e-6 * cfg.model.U) ++narrow_gaps;
  if (narrow_gaps > 0)
    std::cerr << "warning: " << narrow_gaps
              << " grid points have gap < 1e-6 U; ground state may be "
                 "near-degenerate there\n";

  io::Table out;
  out.columns = {"omega_over_J", "diff_e",     "diff_g", "diff_total",
                 "energy_over_J", "gap_over_J", "xi2"};
  out.rows.reserve(table.size());
  for (const auto& r : table)
    out.rows.push_back({r.omega, r.diff_e, r.diff_g, r.diff_total, r.energy,
                        r.gap, r.xi2});
  const std::string hash = io::config_hash_hex(cfg.raw);
  io::write_table(cfg.output.path, out, hash, cfg.output);
  io::write_sidecar(cfg.output.path,
                    sidecar_meta(cfg, "ground-sweep", threads, watch.seconds()));
}

void run_thresholds(const CliOptions& cli) {
  const Stopwatch watch;
  const io::RunConfig cfg = load(cli);
  if (!cfg.has_model) throw io::ConfigError("thresholds: model block required");
  const int n_max = cfg.model.N / 2;
  if (n_max < 1)
    throw io::ConfigError("thresholds: need N >= 2 for at least one sector");
  const unsigned threads = resolve_threads(cli);

  std::vector<double> detected(static_cast<std::size_t>(n_max),
                               std::numeric_limits<double>::quiet_NaN());
  if (cfg.sweep) {
    const Basis basis(cfg.model.N);
    const SparseHermitian h = assemble(basis);
    const auto grid = linear_grid(cfg.sweep->omega_min, cfg.sweep->omega_max,
                                  cfg.sweep->omega_step);
    const SweepTable table =
        sweep_ground(basis, h, cfg.model, grid, cfg.solver, threads);
    for (const auto& step : detect_steps(table, cfg.model.N))
      if (step.n >= 1 && step.n <= n_max)
        detected[static_cast<std::size_t>(step.n - 1)] = step.omega;
  }

  io::Table out;
  out.columns = {"n", "omega_n_analytic_over_J", "omega_n_detected_over_J",
                 "rel_error"};
  for (int n = 1; n <= n_max; ++n) {
    double analytic = std::numeric_limits<double>::quiet_NaN();
    try {
      analytic = tunneling_threshold(n, cfg.model.U, cfg.model.Delta);
    } catch (const std::invalid_argument&) {
      // nonreal threshold: row stays flagged with nan
    }
    const double det = detected[static_cast<std::size_t>(n - 1)];
    double rel = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(analytic) && analytic > 0.0 && std::isfinite(det))
      rel = std::abs(det - analytic) / analytic;
    out.rows.push_back({double(n), analytic, det, rel});
  }
  const std::string hash = io::config_hash_hex(cfg.raw);
  io::write_table(cfg.output.path, out, hash, cfg.output);
  io::write_sidecar(cfg.output.path,
                    sidecar_meta(cfg, "thresholds", threads, watch.seconds()));
}

std::string batch_path(const std::string& path, double v) {
  const std::string tag = "_v" + io::format_double(v, 12);
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

void run_evolve(const CliOptions& cli) {
  const Stopwatch watch;
  const io::RunConfig cfg = load(cli);
  if (!cfg.has_model) throw io::ConfigError("evolve: model block required");
  if (!cfg.ramp) throw io::ConfigError("evolve: ramp block required");
  const unsigned threads = resolve_threads(cli);

  const Basis basis(cfg.model.N);
  const SparseHermitian h = assemble(basis);
  const StateVector psi0 = initial_state(basis, h, cfg.model, cfg.solver);
  const bool batch = cfg.ramp_rates.size() > 1;

  const auto run_one = [&](double v) {
    RampProtocol proto = *cfg.ramp;
    proto.v = v;
    const int stride = sample_stride(cfg, proto);
    if (cli.self_test) {
      const ConvergenceReport gate =
          dt_convergence_gate(basis, h, cfg.model, proto, psi0, stride);
      if (!gate.pass)
        throw NumericalError(
            "evolve: dt-halving gate failed (max observable change " +
            std::to_string(gate.max_change) + " > 1e-6); use a smaller dt");
      std::cerr << "self-test: dt gate passed, max observable change "
                << gate.max_change << "\n";
    }
    Trajectory traj = propagate(basis, h, cfg.model, proto, psi0, stride, true);
    ground_fidelity(traj, basis, h, cfg.model, proto, cfg.solver);

    io::Table out;
    out.columns = {"Jt",         "omega_over_J", "diff_e", "diff_g",
                   "diff_total", "norm",         "fidelity", "xi2"};
    out.rows.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
      out.rows.push_back({s.t, s.omega, s.diff_e, s.diff_g, s.diff_total,
                          s.norm, s.fidelity, s.xi2});
    const std::string path =
        batch ? batch_path(cfg.output.path, v) : cfg.output.path;
    const std::string hash = io::config_hash_hex(cfg.raw);
    io::write_table(path, out, hash, cfg.output);
    io::write_sidecar(path, sidecar_meta(cfg, "evolve", threads, watch.seconds()));
  };

  if (!batch) {
    run_one(cfg.ramp_rates.front());
    return;
  }
  // batch trajectories are independent; run them on the thread budget
  std::vector<std::future<void>> futs;
  const unsigned width = std::max(1u, std::min<unsigned>(
                                          threads, cfg.ramp_rates.size()));
  for (unsigned w = 0; w < width; ++w)
    futs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < cfg.ramp_rates.size(); i += width)
        run_one(cfg.ramp_rates[i]);
    }));
  for (auto& f : futs) f.get();
}

void run_validate_appendix(const CliOptions& cli) {
  const Stopwatch watch;
  const io::RunConfig cfg = load(cli);
  if (!cfg.three_level)
    throw io::ConfigError("validate-appendix: three_level block required");
  const io::ThreeLevelConfig& tl = *cfg.three_level;
  if (tl.params.Delta_r == 0.0)
    throw io::ConfigError("validate-appendix: Delta_r must be nonzero");

  double t_final = tl.t_final;
  if (t_final <= 0.0) {
    const EffectiveTwoLevel eff = adiabatic_elimination(tl.params);
    if (eff.Omega_eff == 0.0)
      throw io::ConfigError(
          "validate-appendix: t_final required when the effective coupling "
          "vanishes");
    t_final = std::acos(-1.0) / (2.0 * std::abs(eff.Omega_eff));
  }
  const EliminationReport rep =
      validate_elimination(tl.params, t_final, tl.dt);

  json report;
  report["max_population_error"] = rep.max_population_error;
  report["coupling_ratio"] = rep.coupling_ratio;
  report["predicted_error_scale"] = rep.coupling_ratio * rep.coupling_ratio;
  report["threshold"] = rep.threshold;
  report["pass"] = rep.pass;
  report["regime_ok"] = rep.regime_ok;
  if (!rep.warning.empty()) report["warning"] = rep.warning;
  report["t_final"] = t_final;
  io::write_json_report(cfg.output.path, report, io::config_hash_hex(cfg.raw));
  io::write_sidecar(cfg.output.path, sidecar_meta(cfg, "validate-appendix",
                                                  1, watch.seconds()));
  if (!rep.warning.empty()) std::cerr << "warning: " << rep.warning << "\n";
}

void run_trap_estimate(const CliOptions& cli) {
  const Stopwatch watch;
  const io::RunConfig cfg = load(cli);
  if (!cfg.trap) throw io::ConfigError("trap-estimate: trap block required");
  const io::TrapConfig& t = *cfg.trap;
  const double two_pi = 2.0 * std::acos(-1.0);
  const double hbar = 1.054571817e-34;
  const double v_b = hbar * two_pi * t.barrier_hz;
  const double omega0 = effective_trap_frequency(v_b, t.mass_kg, t.x0_m);

  json report;
  report["omega0_rad_per_s"] = omega0;
  report["omega0_over_2pi_hz"] = omega0 / two_pi;
  if (t.U_hz && t.N) {
    const auto v = two_mode_validity(omega0, two_pi * (*t.U_hz), *t.N);
    report["ratio_UN_over_omega0"] = v.ratio;
    report["two_mode_valid"] = v.valid;
  }
  io::write_json_report(cfg.output.path, report, io::config_hash_hex(cfg.raw));
  io::write_sidecar(cfg.output.path,
                    sidecar_meta(cfg, "trap-estimate", 1, watch.seconds()));
}

void add_common(CLI::App* sub, CliOptions& opts) {
  sub->add_option("--config", opts.config_path, "JSON config file")
      ->required();
  sub->add_option("--out", opts.out_path, "output path (overrides config)");
  sub->add_option("--format", opts.format, "csv or json (overrides config)");
  sub->add_option("--threads", opts.threads,
                  "worker threads (default: SPINWELL_THREADS or all cores)");
  sub->add_flag("--self-test", opts.self_test,
                "run the dt-halving convergence gate before producing output");
}

}  // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{
      "spinwell: exact-diagonalization study of a laser-driven two-component "
      "Bose gas in a double well"};
  app.require_subcommand(1);

  CliOptions opts;
  void (*runners[])(const CliOptions&) = {
      run_ground_sweep, run_thresholds, run_evolve, run_validate_appendix,
      run_trap_estimate};
  const char* names[] = {"ground-sweep", "thresholds", "evolve",
                         "validate-appendix", "trap-estimate"};
  const char* blurbs[] = {
      "ground-state observables on an Omega grid",
      "analytic tunneling thresholds vs sweep-detected steps",
      "time evolution under the linear ramp Omega(t) = v t",
      "three-level vs eliminated two-level dynamics report",
      "effective trap frequency and two-mode validity"};
  CLI::App* subs[5];
  for (int i = 0; i < 5; ++i) {
    subs[i] = app.add_subcommand(names[i], blurbs[i]);
    add_common(subs[i], opts);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (int i = 0; i < 5; ++i)
      if (subs[i]->parsed()) runners[i](opts);
    return 0;
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
