#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cohsync/coherence.hpp"
#include "cohsync/control.hpp"
#include "cohsync/scenario.hpp"
#include "cohsync/trace.hpp"

namespace cohsync {

struct MonteCarloConfig {
  ArrayScenario array;
  double threshold = 0.9;
  std::size_t trials = 10'000;
  /// sigma_d / wavelength
  std::vector<double> sigma_grid;
  std::vector<double> probabilities{0.9, 0.8, 0.7};
};

struct TuningConfig {
  TuningPlantOptions plant{22.0, 2.0e6, 40};
  std::vector<double> k_grid;
  OscillationCriteria criteria{0.25, 5, 0.9, 2.0e6};
};

/// Everything a CLI invocation can configure. Defaults reproduce the
/// experimental setup: 200-pulse windows, 105 ms pulse spacing, 10 mm target.
struct RunConfig {
  std::uint64_t seed = 1;
  bool seed_set = false;  // seed came from a document or flag
  ScenarioConfig scenario;
  PiControllerState controller;
  bool adaptive = true;
  double duration_s = 0.0;  // 0 runs the whole trace
  MonteCarloConfig montecarlo;
  std::optional<TraceProgram> trace_program;
  std::optional<WeatherSnrModel> weather_model;
  TuningConfig tuning;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a YAML or JSON document over the defaults. Unknown keys, wrong
/// types and invalid values raise ConfigError naming `source:line:column`.
RunConfig load_config_string(const std::string& text, const std::string& source = "<config>");
RunConfig load_config_file(const std::string& path);

/// The full resolved configuration as JSON text; loading it back gives the
/// same RunConfig.
std::string config_to_json(const RunConfig& config, int indent = 2);

/// "lo:hi:n" (n evenly spaced points, inclusive) or "a,b,c".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace cohsync
