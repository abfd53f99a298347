#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cohsync {

/// Exit codes: 0 outputs written, 1 runtime failure, 2 bad arguments or config.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CrlbCommand {
  double delta_f = 3.75e6;                 // Hz
  std::string snr_grid = "0:80:81";        // post-processing 2E/N0, dB
  std::string out;                         // directory; crlb.csv
};

struct MonteCarloCommand {
  std::optional<std::string> config;
  std::optional<int> nodes;
  std::optional<double> threshold;
  std::optional<std::size_t> trials;
  std::optional<std::string> sigma_grid;   // sigma_d / wavelength
  std::optional<std::uint64_t> seed;
  std::string out;                         // directory; curve.csv, thresholds.json
};

struct RunCommand {
  std::optional<std::string> config;
  std::optional<std::string> trace;        // CSV; else the config's trace_program
  std::optional<bool> adaptive;
  std::optional<double> duration_s;
  std::optional<std::uint64_t> seed;
  std::string out;                         // directory; run_log.csv, summary.json, resolved_config.json
};

struct TuneCommand {
  std::optional<std::string> config;
  std::optional<std::string> k_grid;
  std::optional<std::uint64_t> seed;
  std::string out;                         // directory; tune.json, tune_sweep.csv
};

/// Each command writes its files and returns an exit code; messages go to
/// `log` and errors to `err`.
int cmd_crlb(const CrlbCommand& cmd, std::ostream& log, std::ostream& err);
int cmd_montecarlo(const MonteCarloCommand& cmd, std::ostream& log, std::ostream& err);
int cmd_run(const RunCommand& cmd, std::ostream& log, std::ostream& err);
int cmd_tune(const TuneCommand& cmd, std::ostream& log, std::ostream& err);

/// Parses argv and dispatches to a subcommand. A seed given neither by flag
/// nor by config falls back to COHSYNC_SEED, then 1.
int cli_main(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace cohsync
