#include "cohsync/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "cohsync/config.hpp"
#include "cohsync/rng.hpp"
#include "cohsync/signal.hpp"
#include "json.hpp"

namespace cohsync {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr std::uint64_t kWeatherStream = 0x57;

RunConfig load_or_default(const std::optional<std::string>& path) {
  if (path) return load_config_file(*path);
  return load_config_string("", "<defaults>");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const RunConfig& rc) {
  if (flag) return *flag;
  if (rc.seed_set) return rc.seed;
  if (const char* env = std::getenv("COHSYNC_SEED"); env != nullptr && *env != '\0') {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto res = std::from_chars(env, end, v);
    if (res.ec != std::errc() || res.ptr != end) {
      throw ConfigError(std::string("COHSYNC_SEED is not an unsigned integer: '") + env + "'");
    }
    return v;
  }
  return 1;
}

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

void write_text(const fs::path& path, const std::string& text) {
  auto f = open_out(path);
  f << text << '\n';
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int cmd_crlb(const CrlbCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    std::vector<double> grid;
    try {
      grid = parse_grid(cmd.snr_grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--snr-grid: ") + e.what());
    }
    if (!(cmd.delta_f > 0.0)) throw ConfigError("--delta-f must be > 0");
    const auto dir = prepare_out(cmd.out);
    auto f = open_out(dir / "crlb.csv");
    f << "post_snr_db,post_snr,sigma_r_m,sigma_t_s\n";
    for (double db : grid) {
      const double rho = std::pow(10.0, db / 10.0);
      const double beta2 = std::pow(kTwoPi * cmd.delta_f, 2);
      f << format_double(db) << ',' << format_double(rho) << ','
        << format_double(crlb_sigma_r(cmd.delta_f, rho)) << ','
        << format_double(crlb_sigma_t(beta2, rho)) << '\n';
    }
    log << "wrote " << (dir / "crlb.csv").string() << " (" << grid.size() << " points)\n";
    return kExitOk;
  });
}

int cmd_montecarlo(const MonteCarloCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig rc = load_or_default(cmd.config);
    auto& mc = rc.montecarlo;
    if (cmd.nodes) mc.array.n_nodes = *cmd.nodes;
    if (cmd.threshold) mc.threshold = *cmd.threshold;
    if (cmd.trials) mc.trials = *cmd.trials;
    if (cmd.sigma_grid) {
      try {
        mc.sigma_grid = parse_grid(*cmd.sigma_grid);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--sigma-grid: ") + e.what());
      }
    }
    try {
      mc.array.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (mc.trials == 0) throw ConfigError("--trials must be > 0");
    if (mc.trials < 1000) {
      err << "warning: " << mc.trials << " trials is below the 1000 needed for stable thresholds\n";
    }
    rc.seed = resolve_seed(cmd.seed, rc);

    const double lambda = mc.array.wavelength;
    std::vector<double> sigma_m;
    for (double g : mc.sigma_grid) sigma_m.push_back(g * lambda);
    const auto curve = probability_curve(mc.array, sigma_m, mc.threshold, mc.trials, rc.seed);

    const auto dir = prepare_out(cmd.out);
    {
      auto f = open_out(dir / "curve.csv");
      f << "sigma_over_lambda,sigma_d_m,probability,std_error\n";
      for (std::size_t i = 0; i < curve.sigma_d.size(); ++i) {
        f << format_double(mc.sigma_grid[i]) << ',' << format_double(curve.sigma_d[i]) << ','
          << format_double(curve.probability[i]) << ',' << format_double(curve.std_error[i]) << '\n';
      }
    }
    Json thresholds = Json::object();
    for (double p : mc.probabilities) {
      const auto s = threshold_sigma(curve, p);
      thresholds[format_double(p)] = s ? Json(*s / lambda) : Json(nullptr);
    }
    Json report;
    report["nodes"] = mc.array.n_nodes;
    report["threshold"] = mc.threshold;
    report["trials"] = mc.trials;
    report["seed"] = rc.seed;
    report["monotone_within_2sigma"] = is_monotone_within_bands(curve, 2.0);
    report["sigma_over_lambda"] = thresholds;
    write_text(dir / "thresholds.json", report.dump(2));
    write_text(dir / "resolved_config.json", config_to_json(rc));
    log << "wrote " << (dir / "curve.csv").string() << " and thresholds.json\n";
    for (const auto& [p, v] : thresholds.items()) log << "  P=" << p << "  sigma/lambda=" << v.dump() << '\n';
    return kExitOk;
  });
}

int cmd_run(const RunCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig rc = load_or_default(cmd.config);
    if (cmd.adaptive) rc.adaptive = *cmd.adaptive;
    if (cmd.duration_s) {
      if (!(*cmd.duration_s >= 0.0)) throw ConfigError("--duration must be >= 0");
      rc.duration_s = *cmd.duration_s;
    }
    rc.seed = resolve_seed(cmd.seed, rc);
    rc.scenario.seed = rc.seed;

    std::vector<EnvironmentRecord> records;
    double cadence = 60.0;
    if (cmd.trace) {
      records = read_trace_csv(*cmd.trace);
    } else if (rc.trace_program) {
      records = synthesize_trace(*rc.trace_program, rc.seed);
      cadence = rc.trace_program->cadence_s;
    } else {
      throw ConfigError("no trace: pass --trace or add a trace_program section");
    }
    if (records.empty()) throw std::invalid_argument("trace has no records");
    if (rc.weather_model) {
      records = apply_weather_model(std::move(records), *rc.weather_model,
                                    derive_seed(rc.seed, {kWeatherStream}));
    }
    const EnvironmentTrace trace(std::move(records), cadence);
    const double duration = rc.duration_s > 0.0 ? rc.duration_s : trace.end_s() - trace.start_s();

    const RunResult result = rc.adaptive ? run_adaptive(rc.scenario, rc.controller, trace, duration)
                                         : run_fixed_bandwidth(rc.scenario, trace, duration);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';

    const auto dir = prepare_out(cmd.out);
    write_run_log_csv((dir / "run_log.csv").string(), result.log);
    const RunSummary s = summarize(result.log);
    Json summary;
    summary["mode"] = rc.adaptive ? "adaptive" : "fixed";
    summary["seed"] = rc.seed;
    summary["intervals"] = s.intervals;
    summary["mean_sigma_d_m"] = s.mean_sigma_d;
    summary["max_sigma_d_m"] = s.max_sigma_d;
    summary["f2_hz"] = {{"min", s.f2_min}, {"max", s.f2_max}, {"mean", s.f2_mean}, {"final", s.f2_final}};
    Json freq = Json::object();
    for (const auto& [p, f] : s.max_coherent_frequency_hz) freq[format_double(p)] = f;
    summary["max_coherent_frequency_hz"] = freq;
    summary["gross_errors"] = result.gross_errors;
    summary["saturated_steps"] = result.saturated_steps;
    summary["warnings"] = result.warnings;
    write_text(dir / "summary.json", summary.dump(2));
    write_text(dir / "resolved_config.json", config_to_json(rc));
    log << "wrote " << s.intervals << " intervals to " << dir.string() << "; mean sigma_d "
        << format_double(s.mean_sigma_d) << " m\n";
    return kExitOk;
  });
}

int cmd_tune(const TuneCommand& cmd, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig rc = load_or_default(cmd.config);
    if (cmd.k_grid) {
      try {
        rc.tuning.k_grid = parse_grid(*cmd.k_grid);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--k-grid: ") + e.what());
      }
    }
    if (rc.tuning.k_grid.empty()) rc.tuning.k_grid = parse_grid("2e7:3e8:15");
    rc.seed = resolve_seed(cmd.seed, rc);
    rc.scenario.seed = rc.seed;

    const ClosedLoopPlant inner = make_ranging_plant(rc.scenario, rc.tuning.plant);
    std::vector<std::pair<double, OscillationReport>> sweep;
    const ClosedLoopPlant recording = [&](double k) {
      PlantResponse r = inner(k);
      sweep.emplace_back(k, detect_oscillation(r.output, r.dt, rc.tuning.criteria));
      return r;
    };
    const auto found = find_ultimate_gain(recording, rc.tuning.k_grid, rc.tuning.criteria);

    const auto dir = prepare_out(cmd.out);
    {
      auto f = open_out(dir / "tune_sweep.csv");
      f << "k_p,sustained,periods,period_s,early_ptp_hz,late_ptp_hz\n";
      for (const auto& [k, rep] : sweep) {
        f << format_double(k) << ',' << (rep.sustained ? 1 : 0) << ',' << rep.periods << ','
          << format_double(rep.period) << ',' << format_double(rep.early_amplitude) << ','
          << format_double(rep.late_amplitude) << '\n';
      }
    }
    Json report;
    report["found"] = found.has_value();
    report["seed"] = rc.seed;
    report["snr_db"] = rc.tuning.plant.snr_db;
    report["x0_hz"] = rc.tuning.plant.x0;
    if (found) {
      const PiGains g = ziegler_nichols_gains(found->k_u, found->t_u);
      report["k_u"] = found->k_u;
      report["t_u_s"] = found->t_u;
      report["k_p"] = g.k_p;
      report["t_i_s"] = g.t_i;
      log << "K_u=" << format_double(found->k_u) << " T_u=" << format_double(found->t_u)
          << " s -> K_p=" << format_double(g.k_p) << " T_i=" << format_double(g.t_i) << " s\n";
    } else {
      log << "no grid gain produced sustained oscillation\n";
    }
    write_text(dir / "tune.json", report.dump(2));
    write_text(dir / "resolved_config.json", config_to_json(rc));
    return kExitOk;
  });
}

int cli_main(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"Two-tone ranging, frequency transfer and adaptive bandwidth simulator"};
  app.require_subcommand(1);

  CrlbCommand crlb;
  auto* c = app.add_subcommand("crlb", "ranging bound versus post-processing SNR");
  c->add_option("--delta-f", crlb.delta_f, "half tone separation, Hz");
  c->add_option("--snr-grid", crlb.snr_grid, "2E/N0 grid in dB, lo:hi:n or a,b,c");
  c->add_option("--out", crlb.out, "output directory")->required();

  MonteCarloCommand mc;
  auto* m = app.add_subcommand("montecarlo", "P(G_c >= X) versus sigma_d / lambda");
  m->add_option("--config", mc.config);
  m->add_option("--nodes", mc.nodes);
  m->add_option("--threshold", mc.threshold);
  m->add_option("--trials", mc.trials);
  m->add_option("--sigma-grid", mc.sigma_grid, "sigma_d / lambda, lo:hi:n or a,b,c");
  m->add_option("--seed", mc.seed);
  m->add_option("--out", mc.out, "output directory")->required();

  RunCommand run;
  bool adaptive_flag = false;
  bool fixed_flag = false;
  auto* r = app.add_subcommand("run", "closed-loop or fixed-bandwidth run over a trace");
  r->add_option("--config", run.config);
  r->add_option("--trace", run.trace, "environment CSV");
  auto* a_opt = r->add_flag("--adaptive", adaptive_flag);
  auto* f_opt = r->add_flag("--fixed", fixed_flag);
  a_opt->excludes(f_opt);
  r->add_option("--duration", run.duration_s, "seconds; 0 for the whole trace");
  r->add_option("--seed", run.seed);
  r->add_option("--out", run.out, "output directory")->required();

  TuneCommand tune;
  auto* t = app.add_subcommand("tune", "Ziegler-Nichols tuning on the ranging plant");
  t->add_option("--config", tune.config);
  t->add_option("--k-grid", tune.k_grid, "proportional gains, lo:hi:n or a,b,c");
  t->add_option("--seed", tune.seed);
  t->add_option("--out", tune.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*c) return cmd_crlb(crlb, log, err);
  if (*m) return cmd_montecarlo(mc, log, err);
  if (*r) {
    if (adaptive_flag) run.adaptive = true;
    if (fixed_flag) run.adaptive = false;
    return cmd_run(run, log, err);
  }
  return cmd_tune(tune, log, err);
}

}  // namespace cohsync
