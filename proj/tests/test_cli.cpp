#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string stderr_text;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "spinwell_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = std::string(SPINWELL_CLI_PATH) + " " + args + " 2>" +
                          err.string() + " >/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  r.stderr_text = ss.str();
  return r;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream out(p);
  out << j.dump(1);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

json sweep_config() {
  return {
      {"model", {{"units", "J"}, {"N", 4}, {"U", 10.0}, {"Delta", 20.0}}},
      {"sweep",
       {{"omega_min", 0.0}, {"omega_max", 10.0}, {"omega_step", 1.0}}},
      {"output", {{"format", "csv"}, {"precision", 12}}},
  };
}

}  // namespace

TEST_CASE("ground-sweep produces a deterministic hashed CSV") {
  const fs::path cfg = write_config("sweep.json", sweep_config());
  const fs::path out = scratch() / "sweep.csv";
  const auto r = run_cli("ground-sweep --config " + cfg.string() + " --out " +
                         out.string());
  CAPTURE(r.stderr_text);
  REQUIRE(r.exit_code == 0);

  const std::string text = slurp(out);
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');
  const auto lines = split(text, '\n');
  REQUIRE(lines.size() >= 13);  // hash + header + 11 rows
  CHECK(lines[0].rfind("# config_hash=", 0) == 0);
  CHECK(lines[1] ==
        "omega_over_J,diff_e,diff_g,diff_total,energy_over_J,gap_over_J,xi2");
  CHECK(split(lines[2], ',').size() == 7);

  SECTION("rerun is byte-identical") {
    const fs::path out2 = scratch() / "sweep2.csv";
    const auto r2 = run_cli("ground-sweep --config " + cfg.string() +
                            " --out " + out2.string());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(out2) == text);
  }
  SECTION("sidecar metadata exists and echoes the config") {
    const json meta = json::parse(slurp(out.string() + ".meta.json"));
    CHECK(meta["subcommand"] == "ground-sweep");
    CHECK(meta["config"]["model"]["N"] == 4);
    CHECK(lines[0] ==
          "# config_hash=" + meta["config_hash"].get<std::string>());
  }
}

TEST_CASE("ground-sweep json format carries the hash as a field") {
  json cfg_json = sweep_config();
  cfg_json["sweep"]["omega_max"] = 3.0;
  const fs::path cfg = write_config("sweep_json.json", cfg_json);
  const fs::path out = scratch() / "sweep.json.out";
  const auto r = run_cli("ground-sweep --config " + cfg.string() + " --out " +
                         out.string() + " --format json");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc.contains("config_hash"));
  REQUIRE(doc["columns"].size() == 7);
  CHECK(doc["rows"].size() == 4);
}

TEST_CASE("empty grid is a usage error with exit code 2") {
  json bad = sweep_config();
  bad["sweep"]["omega_max"] = -1.0;
  const fs::path cfg = write_config("bad_grid.json", bad);
  const auto r = run_cli("ground-sweep --config " + cfg.string() + " --out " +
                         (scratch() / "x.csv").string());
  CHECK(r.exit_code == 2);
}

TEST_CASE("config parse and usage failures exit with 2") {
  SECTION("missing file") {
    const auto r = run_cli("ground-sweep --config /nonexistent.json --out x");
    CHECK(r.exit_code == 2);
  }
  SECTION("malformed json") {
    const fs::path p = scratch() / "broken.json";
    std::ofstream(p) << "{ not json";
    const auto r =
        run_cli("ground-sweep --config " + p.string() + " --out x");
    CHECK(r.exit_code == 2);
  }
  SECTION("unknown subcommand") {
    const auto r = run_cli("frobnicate");
    CHECK(r.exit_code == 2);
  }
  SECTION("undeclared units") {
    json cfg_json = sweep_config();
    cfg_json["model"].erase("units");
    const fs::path cfg = write_config("no_units.json", cfg_json);
    const auto r = run_cli("ground-sweep --config " + cfg.string() +
                           " --out " + (scratch() / "y.csv").string());
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("units") != std::string::npos);
  }
  SECTION("missing output path") {
    const fs::path cfg = write_config("no_out.json", sweep_config());
    const auto r = run_cli("ground-sweep --config " + cfg.string());
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("thresholds emits analytic values and detected crossings") {
  const json cfg_json = {
      {"model", {{"units", "J"}, {"N", 8}, {"U", 10.0}, {"Delta", 20.0}}},
      {"sweep",
       {{"omega_min", 20.0}, {"omega_max", 40.0}, {"omega_step", 0.25}}},
  };
  const fs::path cfg = write_config("thresholds.json", cfg_json);
  const fs::path out = scratch() / "thresholds.csv";
  const auto r = run_cli("thresholds --config " + cfg.string() + " --out " +
                         out.string());
  CAPTURE(r.stderr_text);
  REQUIRE(r.exit_code == 0);
  const auto lines = split(slurp(out), '\n');
  REQUIRE(lines.size() >= 6);
  CHECK(lines[1] ==
        "n,omega_n_analytic_over_J,omega_n_detected_over_J,rel_error");
  const auto row1 = split(lines[2], ',');
  REQUIRE(row1.size() == 4);
  CHECK(std::stod(row1[1]) == Catch::Approx(28.284271247).epsilon(1e-9));
  CHECK(std::stod(row1[2]) == Catch::Approx(28.284271247).epsilon(0.05));
  CHECK(std::stod(row1[3]) < 0.05);
  // n = 2..4 lie beyond this grid: detected column is nan
  const auto row2 = split(lines[3], ',');
  CHECK(row2[2] == "nan");
}

TEST_CASE("evolve writes the trajectory table") {
  const json cfg_json = {
      {"model", {{"units", "J"}, {"N", 2}, {"U", 10.0}, {"Delta", 20.0}}},
      {"ramp",
       {{"v", 2.5}, {"t_final", 2.0}, {"dt", 1e-3}, {"sample_every", 200}}},
  };
  const fs::path cfg = write_config("evolve.json", cfg_json);
  const fs::path out = scratch() / "evolve.csv";
  const auto r = run_cli("evolve --config " + cfg.string() + " --out " +
                         out.string() + " --self-test");
  CAPTURE(r.stderr_text);
  REQUIRE(r.exit_code == 0);
  CHECK(r.stderr_text.find("self-test") != std::string::npos);
  const auto lines = split(slurp(out), '\n');
  CHECK(lines[1] == "Jt,omega_over_J,diff_e,diff_g,diff_total,norm,fidelity,xi2");
  REQUIRE(lines.size() >= 13);  // hash + header + 11 samples
  const auto last = split(lines[lines.size() - 1], ',');
  REQUIRE(last.size() == 8);
  CHECK(std::stod(last[0]) == Catch::Approx(2.0));
  CHECK(std::stod(last[1]) == Catch::Approx(5.0));
  CHECK(std::stod(last[5]) == Catch::Approx(1.0).margin(1e-8));   // norm
  CHECK(std::stod(last[6]) == Catch::Approx(1.0).margin(0.05));   // fidelity
}

TEST_CASE("evolve batch over v writes one table per rate") {
  const json cfg_json = {
      {"model", {{"units", "J"}, {"N", 2}, {"U", 10.0}, {"Delta", 20.0}}},
      {"ramp", {{"v", {2.0, 4.0}}, {"t_final", 1.0}, {"dt", 1e-3}}},
  };
  const fs::path cfg = write_config("evolve_batch.json", cfg_json);
  const fs::path out = scratch() / "batch.csv";
  const auto r =
      run_cli("evolve --config " + cfg.string() + " --out " + out.string());
  CAPTURE(r.stderr_text);
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(scratch() / "batch_v2.csv"));
  CHECK(fs::exists(scratch() / "batch_v4.csv"));
}

TEST_CASE("degenerate initial state is a numerical failure with exit code 3") {
  const json cfg_json = {
      {"model", {{"units", "J"}, {"N", 1}, {"U", 0.0}, {"Delta", 0.0}}},
      {"ramp", {{"v", 1.0}, {"t_final", 1.0}, {"dt", 1e-3}}},
  };
  const fs::path cfg = write_config("degenerate.json", cfg_json);
  const auto r = run_cli("evolve --config " + cfg.string() + " --out " +
                         (scratch() / "deg.csv").string());
  CHECK(r.exit_code == 3);
}

TEST_CASE("validate-appendix reports pass/fail") {
  SECTION("deep elimination regime passes") {
    const json cfg_json = {
        {"three_level",
         {{"Omega_g", 0.02}, {"Omega_e", 0.02}, {"Delta_r", 1.0},
          {"Delta_e", 0.0}}},
    };
    const fs::path cfg = write_config("appendix.json", cfg_json);
    const fs::path out = scratch() / "appendix.json.out";
    const auto r = run_cli("validate-appendix --config " + cfg.string() +
                           " --out " + out.string());
    CAPTURE(r.stderr_text);
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["pass"] == true);
    CHECK(rep["max_population_error"].get<double>() <= 2e-3);
    CHECK(rep["regime_ok"] == true);
  }
  SECTION("strong coupling is flagged outside the regime") {
    const json cfg_json = {
        {"three_level",
         {{"Omega_g", 0.3}, {"Omega_e", 0.3}, {"Delta_r", 1.0},
          {"Delta_e", 0.0}}},
    };
    const fs::path cfg = write_config("appendix_bad.json", cfg_json);
    const fs::path out = scratch() / "appendix_bad.json.out";
    const auto r = run_cli("validate-appendix --config " + cfg.string() +
                           " --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const json rep = json::parse(slurp(out));
    CHECK(rep["regime_ok"] == false);
    CHECK(rep.contains("warning"));
  }
  SECTION("zero Delta_r is a usage error") {
    const json cfg_json = {
        {"three_level",
         {{"Omega_g", 0.1}, {"Omega_e", 0.1}, {"Delta_r", 0.0}}},
    };
    const fs::path cfg = write_config("appendix_zero.json", cfg_json);
    const auto r = run_cli("validate-appendix --config " + cfg.string() +
                           " --out " + (scratch() / "z.json").string());
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("trap-estimate computes omega0 and the validity ratio") {
  const json cfg_json = {
      {"trap",
       {{"barrier_hz", 50.0}, {"mass_kg", 1.443e-25}, {"x0_m", 1e-6},
        {"U_hz", 3.4}, {"N", 10}}},
  };
  const fs::path cfg = write_config("trap.json", cfg_json);
  const fs::path out = scratch() / "trap.json.out";
  const auto r = run_cli("trap-estimate --config " + cfg.string() + " --out " +
                         out.string());
  CAPTURE(r.stderr_text);
  REQUIRE(r.exit_code == 0);
  const json rep = json::parse(slurp(out));
  CHECK(rep["omega0_over_2pi_hz"].get<double>() == Catch::Approx(215.7).margin(0.5));
  // U N / omega0 = 3.4 * 10 / 215.7: this corner cannot hold ten atoms
  CHECK(rep["ratio_UN_over_omega0"].get<double>() ==
        Catch::Approx(0.1576).margin(5e-4));
  CHECK(rep["two_mode_valid"] == false);

  SECTION("fewer atoms restore validity") {
    json few = cfg_json;
    few["trap"]["N"] = 4;
    const fs::path cfg2 = write_config("trap_few.json", few);
    const fs::path out2 = scratch() / "trap_few.json.out";
    REQUIRE(run_cli("trap-estimate --config " + cfg2.string() + " --out " +
                    out2.string())
                .exit_code == 0);
    const json rep2 = json::parse(slurp(out2));
    CHECK(rep2["two_mode_valid"] == true);
  }
}
