#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cohsync/cli.hpp"
#include "cohsync/config.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace cohsync;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cohsync_cli_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "cohsync");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), log, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("grid parsing") {
  const auto g = parse_grid("0:1:5");
  REQUIRE(g.size() == 5);
  CHECK(g[2] == doctest::Approx(0.5));
  CHECK(g.back() == 1.0);
  CHECK(parse_grid("3,1.5,2e3") == std::vector<double>{3.0, 1.5, 2000.0});
  CHECK(parse_grid("7:7:1") == std::vector<double>{7.0});
  CHECK_THROWS_AS(parse_grid("0:1:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("a,b"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
}

TEST_CASE("config defaults and overrides") {
  const auto d = load_config_string("");
  CHECK_FALSE(d.seed_set);
  CHECK(d.scenario.pulses_per_interval == 200);
  CHECK(d.scenario.waveform.two_tone.f2 == 3.5e6);
  CHECK(d.montecarlo.sigma_grid.size() == 81);
  CHECK(d.controller.k_p == kDefaultKp);

  const auto c = load_config_string(R"(
seed: 9
waveform:
  f2: 6.0e6
controller:
  k_p: 1.0e-5
  t_i: 3.3
  error_unit: 1.0e-3
  output_unit: 1.0e6
scenario:
  mode: fixed
  duration_s: 420
montecarlo:
  n_nodes: 3
  sigma_grid: "0:0.1:11"
)");
  CHECK(c.seed == 9);
  CHECK(c.seed_set);
  CHECK(c.scenario.waveform.two_tone.f2 == 6.0e6);
  CHECK(c.controller.t_i == 3.3);
  CHECK_FALSE(c.adaptive);
  CHECK(c.duration_s == 420.0);
  CHECK(c.montecarlo.array.n_nodes == 3);
  CHECK(c.montecarlo.sigma_grid.size() == 11);

  const auto j = load_config_string(R"({"seed": 4, "scenario": {"mode": "adaptive"}})", "x.json");
  CHECK(j.seed == 4);
  CHECK(j.adaptive);
}

TEST_CASE("config errors name the line") {
  try {
    load_config_string("seed: 1\nwaveform:\n  f2: 3.0e6\n  bandwith: 2\n", "cfg.yaml");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("cfg.yaml:4") != std::string::npos);
    CHECK(what.find("bandwith") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config_string("controller:\n  t_i: fast\n"), ConfigError);
  CHECK_THROWS_AS(load_config_string("scenario:\n  mode: sideways\n"), ConfigError);
  CHECK_THROWS_AS(load_config_string("waveform:\n  f2: -1\n"), ConfigError);
  CHECK_THROWS_AS(load_config_string("seed: [1, 2"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/cohsync.yaml"), ConfigError);
}

TEST_CASE("resolved config round trip") {
  const auto c = load_config_string(R"(
seed: 11
trace_program:
  cadence_s: 30
  segments:
    - {start_s: 0, end_s: 300, kind: constant, snr_db: 22}
    - {start_s: 300, end_s: 900, kind: ar1, snr_db: 12, ar_phi: 0.8, ar_std: 1.5, wind_mps: 4}
weather_model:
  rain_db_per_mmhr: 1.0
)");
  const std::string text = config_to_json(c);
  const auto back = load_config_string(text, "resolved.json");
  CHECK(config_to_json(back) == text);
  REQUIRE(back.trace_program.has_value());
  CHECK(back.trace_program->segments.size() == 2);
  CHECK(back.trace_program->segments[1].wind_mps == 4.0);
  CHECK(back.weather_model->rain_db_per_mmhr == 1.0);
  CHECK(back.seed == 11);
}

TEST_CASE("crlb command") {
  TempDir t;
  CHECK(run_cli({"crlb", "--delta-f", "3.75e6", "--snr-grid", "40,60,80", "--out", t.path.string()}) == kExitOk);
  const auto csv = slurp(t.path / "crlb.csv");
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  std::getline(in, row);
  // 60 dB: 6.36 mm
  CHECK(row.find("0.00636") != std::string::npos);
}

TEST_CASE("montecarlo command") {
  TempDir t;
  std::string err;
  CHECK(run_cli({"montecarlo", "--trials", "300", "--sigma-grid", "0:0.2:41", "--seed", "5", "--out",
                 t.path.string()},
                &err) == kExitOk);
  CHECK(err.find("warning") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(t.path / "thresholds.json"));
  CHECK(j["trials"] == 300);
  CHECK(j["seed"] == 5);
  CHECK(j["sigma_over_lambda"]["0.9"].get<double>() == doctest::Approx(0.0495).epsilon(0.3));
  CHECK(fs::exists(t.path / "curve.csv"));
  CHECK_NOTHROW(load_config_file((t.path / "resolved_config.json").string()));

  TempDir u;
  CHECK(run_cli({"montecarlo", "--trials", "300", "--sigma-grid", "0:0.2:41", "--seed", "5", "--out",
                 u.path.string()}) == kExitOk);
  CHECK(slurp(t.path / "curve.csv") == slurp(u.path / "curve.csv"));
}

TEST_CASE("run command") {
  TempDir t;
  const auto cfg = t.path / "cfg.yaml";
  write_file(cfg, R"(
seed: 3
scenario:
  pulses_per_interval: 20
  mode: adaptive
trace_program:
  segments:
    - {start_s: 0, end_s: 120, kind: constant, snr_db: 20}
)");
  const auto out = t.path / "out";
  CHECK(run_cli({"run", "--config", cfg.string(), "--out", out.string()}) == kExitOk);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["mode"] == "adaptive");
  CHECK(summary["seed"] == 3);
  CHECK(summary["intervals"] == static_cast<int>(120.0 / (20 * 0.105)));
  const auto log = slurp(out / "run_log.csv");
  CHECK(log.rfind("interval,f2_hz,", 0) == 0);

  const auto again = t.path / "again";
  CHECK(run_cli({"run", "--config", cfg.string(), "--out", again.string()}) == kExitOk);
  CHECK(slurp(again / "run_log.csv") == log);

  const auto fixed = t.path / "fixed";
  CHECK(run_cli({"run", "--config", cfg.string(), "--fixed", "--duration", "42", "--out", fixed.string()}) ==
        kExitOk);
  CHECK(nlohmann::json::parse(slurp(fixed / "summary.json"))["mode"] == "fixed");

  const auto trace = t.path / "trace.csv";
  write_file(trace, "timestamp_s,snr_db\n0,20\n60,20\n");
  const auto from_csv = t.path / "csv";
  CHECK(run_cli({"run", "--config", cfg.string(), "--trace", trace.string(), "--out", from_csv.string()}) ==
        kExitOk);
}

TEST_CASE("seed precedence") {
  TempDir t;
  const auto cfg_no_seed = t.path / "a.yaml";
  write_file(cfg_no_seed, "scenario:\n  pulses_per_interval: 10\ntrace_program:\n  segments:\n    - {start_s: 0, end_s: 60, kind: constant, snr_db: 20}\n");
  const auto cfg_seed = t.path / "b.yaml";
  write_file(cfg_seed, "seed: 8\n" + slurp(cfg_no_seed));
  auto seed_of = [&](const std::vector<std::string>& extra) {
    const auto out = t.path / "o";
    std::vector<std::string> args{"run", "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run_cli(args) == kExitOk);
    return nlohmann::json::parse(slurp(out / "summary.json"))["seed"].get<std::uint64_t>();
  };
  ::unsetenv("COHSYNC_SEED");
  CHECK(seed_of({"--config", cfg_no_seed.string()}) == 1);
  ::setenv("COHSYNC_SEED", "77", 1);
  CHECK(seed_of({"--config", cfg_no_seed.string()}) == 77);
  CHECK(seed_of({"--config", cfg_seed.string()}) == 8);
  CHECK(seed_of({"--config", cfg_seed.string(), "--seed", "5"}) == 5);
  ::setenv("COHSYNC_SEED", "seven", 1);
  CHECK(run_cli({"run", "--config", cfg_no_seed.string(), "--out", (t.path / "x").string()}) == kExitUsage);
  ::unsetenv("COHSYNC_SEED");
}

TEST_CASE("exit codes") {
  TempDir t;
  const auto out = t.path.string();
  CHECK(run_cli({}) == kExitUsage);
  CHECK(run_cli({"bogus"}) == kExitUsage);
  CHECK(run_cli({"crlb"}) == kExitUsage);
  CHECK(run_cli({"run", "--out", out}) == kExitUsage);
  CHECK(run_cli({"run", "--adaptive", "--fixed", "--out", out}) == kExitUsage);
  CHECK(run_cli({"montecarlo", "--trials", "0", "--out", out}) == kExitUsage);
  CHECK(run_cli({"montecarlo", "--config", "/nonexistent.yaml", "--out", out}) == kExitUsage);
  CHECK(run_cli({"run", "--trace", (t.path / "missing.csv").string(), "--out", out}) == kExitFailure);

  const auto cfg = t.path / "c.yaml";
  write_file(cfg, "trace_program:\n  segments:\n    - {start_s: 0, end_s: 60, kind: constant, snr_db: 20}\n");
  CHECK(run_cli({"run", "--config", cfg.string(), "--duration", "600", "--out", out}) == kExitFailure);
}
