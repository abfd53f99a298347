#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cohsync/channel.hpp"
#include "cohsync/coherence.hpp"
#include "cohsync/control.hpp"
#include "cohsync/ranging.hpp"
#include "cohsync/trace.hpp"

namespace cohsync {

struct ScenarioConfig {
  // two_tone.f2 is the fixed / initial upper tone
  WaveformConfig waveform = [] {
    WaveformConfig w;
    w.two_tone.f2 = 3.5e6;
    return w;
  }();
  RefineOptions estimator;
  ChannelState channel;     // snr_db is taken from the trace
  std::size_t pulses_per_interval = 200;
  std::size_t group_size = 5;
  std::int64_t pulse_period_us = 105'000;
  double target_sigma = 0.01;  // m
  /// Upper tone limit; the controller clamp is [0, f2_max - f1].
  double f2_max = 7.52e6;
  std::uint64_t seed = 1;

  std::int64_t interval_us() const;
  void validate() const;
};

struct ProcessingIntervalLog {
  std::size_t interval = 0;
  double f2_hz = 0.0;         // in force during the interval
  double sigma_d_m = 0.0;
  double mean_range_m = 0.0;
  double snr_db = 0.0;
  double error_m = 0.0;       // sigma_d - target
  double timestamp_s = 0.0;   // interval start
};

struct RunResult {
  std::vector<ProcessingIntervalLog> log;
  std::vector<std::string> warnings;
  std::size_t gross_errors = 0;
  std::size_t saturated_steps = 0;
};

/// One window of pulses at a given SNR and tone pair: the per-pulse
/// estimates and their window statistics. Pulse p draws its noise from
/// derive_seed(seed, {interval, p, 0}) (ranging) and {interval, p, 1}
/// (disambiguation). Both pulses see the same noise variance, referenced to
/// the ranging pulse's mean power.
struct IntervalMeasurement {
  RangeWindowStats stats;
  std::size_t gross_errors = 0;
  double noise_variance = 0.0;
};

IntervalMeasurement measure_interval(const ScenarioConfig& config, const TwoToneSpec& tones,
                                     double snr_db, std::size_t interval);

/// Fixed tone pair for `duration_s` from the trace start. Records are held
/// across the intervals they cover; an interval starting more than one
/// cadence after its record raises a warning and keeps the old value.
RunResult run_fixed_bandwidth(const ScenarioConfig& config, const EnvironmentTrace& trace,
                              double duration_s);

/// Same, with a PI step after every interval: f2 = f1 + x. The first step
/// uses its own error as e_prev. A NaN sigma_d aborts with std::runtime_error.
RunResult run_adaptive(const ScenarioConfig& config, const PiControllerState& controller,
                       const EnvironmentTrace& trace, double duration_s);

/// Closed loop under P-only control at fixed SNR, output = tone separation
/// per interval; for find_ultimate_gain.
struct TuningPlantOptions {
  double snr_db = 22.0;
  double x0 = 1.0e6;  // Hz, initial separation
  std::size_t intervals = 40;
};

ClosedLoopPlant make_ranging_plant(const ScenarioConfig& config, const TuningPlantOptions& options);

struct RunSummary {
  std::size_t intervals = 0;
  double mean_sigma_d = 0.0;
  double max_sigma_d = 0.0;
  double f2_min = 0.0;
  double f2_max = 0.0;
  double f2_mean = 0.0;
  double f2_final = 0.0;
  /// max_coherent_frequency(mean_sigma_d, P) keyed by P.
  std::map<double, double> max_coherent_frequency_hz;
};

RunSummary summarize(const std::vector<ProcessingIntervalLog>& log,
                     const ThresholdTable& table = default_threshold_table());

/// Header interval,f2_hz,sigma_d_m,mean_range_m,snr_db,error_m,timestamp_s;
/// shortest round-trip decimals.
void write_run_log_csv(std::ostream& out, const std::vector<ProcessingIntervalLog>& log);
void write_run_log_csv(const std::string& path, const std::vector<ProcessingIntervalLog>& log);
std::vector<ProcessingIntervalLog> read_run_log_csv(std::istream& in);
std::vector<ProcessingIntervalLog> read_run_log_csv(const std::string& path);

}  // namespace cohsync
