#include "cohsync/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cohsync/rng.hpp"

namespace cohsync {

std::int64_t ScenarioConfig::interval_us() const {
  return static_cast<std::int64_t>(pulses_per_interval) * pulse_period_us;
}

void ScenarioConfig::validate() const {
  waveform.validate();
  estimator.validate();
  if (pulses_per_interval == 0 || group_size == 0 || pulses_per_interval % group_size != 0 ||
      pulses_per_interval / group_size < 2) {
    throw std::invalid_argument("scenario: pulses_per_interval must hold at least two whole groups");
  }
  if (pulse_period_us <= 0) throw std::invalid_argument("scenario: pulse_period_us must be > 0");
  if (!(target_sigma > 0.0)) throw std::invalid_argument("scenario: target_sigma must be > 0");
  if (!(f2_max > waveform.two_tone.f1) || !(2.0 * f2_max < waveform.sample_rate)) {
    throw std::invalid_argument("scenario: f2_max must lie in (f1, sample_rate / 2)");
  }
  if (waveform.two_tone.f2 > f2_max) throw std::invalid_argument("scenario: f2 exceeds f2_max");
  ChannelState probe = channel;
  probe.snr_db = 0.0;
  probe.validate();
}

namespace {

/// Ranging chain plus noise-free received pulses for one tone pair.
class IntervalSimulator {
 public:
  explicit IntervalSimulator(const ScenarioConfig& config) : config_(config) {}

  IntervalMeasurement measure(const TwoToneSpec& tones, double snr_db, std::size_t interval) {
    prepare(tones);
    const double variance = noise_variance_for(ranging_power_, snr_db);
    IntervalMeasurement m;
    m.noise_variance = variance;
    std::vector<double> ranges;
    ranges.reserve(config_.pulses_per_interval);
    for (std::size_t p = 0; p < config_.pulses_per_interval; ++p) {
      ComplexBasebandSignal rx_r = clean_r_;
      ComplexBasebandSignal rx_d = clean_d_;
      add_awgn(rx_r, variance, derive_seed(config_.seed, {interval, p, 0}));
      add_awgn(rx_d, variance, derive_seed(config_.seed, {interval, p, 1}));
      const RangeEstimate est = chain_->estimate(rx_r, rx_d, variance);
      if (est.gross_error) ++m.gross_errors;
      ranges.push_back(est.range);
    }
    m.stats = window_stats(ranges, config_.pulses_per_interval, config_.group_size);
    return m;
  }

 private:
  void prepare(const TwoToneSpec& tones) {
    if (chain_ && tones.f1 == tones_.f1 && tones.f2 == tones_.f2) return;
    WaveformConfig wf = config_.waveform;
    wf.two_tone = tones;
    chain_ = std::make_unique<RangingChain>(wf, config_.estimator);
    tones_ = tones;

    ChannelState clean = config_.channel;
    clean.snr_db = std::numeric_limits<double>::infinity();
    const double delay_samples = round_trip_delay(clean.true_range) * wf.sample_rate;
    const auto guard = static_cast<std::size_t>(std::ceil(delay_samples)) + 32;

    const auto& pr = chain_->ranging_pulse();
    const auto& pd = chain_->disamb_pulse();
    ranging_power_ = pr.mean_power() * clean.repeater_gain * clean.repeater_gain;
    clean_r_ = propagate_round_trip(pr, clean, 0, {pr.size() + guard, 0.0});
    clean_d_ = propagate_round_trip(pd, clean, 0, {pd.size() + guard, 0.0});
  }

  const ScenarioConfig& config_;
  std::unique_ptr<RangingChain> chain_;
  TwoToneSpec tones_;
  ComplexBasebandSignal clean_r_;
  ComplexBasebandSignal clean_d_;
  double ranging_power_ = 0.0;
};

struct Schedule {
  std::size_t intervals = 0;
  std::int64_t start_us = 0;
  std::int64_t step_us = 0;
};

Schedule make_schedule(const ScenarioConfig& config, const EnvironmentTrace& trace,
                       double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("run: duration must be > 0");
  if (trace.start_s() + duration_s > trace.end_s()) {
    throw std::invalid_argument("run: trace ends at " + format_double(trace.end_s()) +
                                " s, before the requested duration");
  }
  Schedule s;
  s.step_us = config.interval_us();
  s.start_us = std::llround(trace.start_s() * 1e6);
  s.intervals = static_cast<std::size_t>(std::llround(std::floor(duration_s * 1e6)) / s.step_us);
  if (s.intervals == 0) throw std::invalid_argument("run: duration shorter than one processing interval");
  return s;
}

template <typename Step>
RunResult run_loop(const ScenarioConfig& config, const EnvironmentTrace& trace, double duration_s,
                   TwoToneSpec tones, Step&& step) {
  config.validate();
  const Schedule sched = make_schedule(config, trace, duration_s);
  IntervalSimulator sim(config);
  RunResult result;
  std::set<std::size_t> gap_records;

  for (std::size_t n = 0; n < sched.intervals; ++n) {
    const std::int64_t t_us = sched.start_us + static_cast<std::int64_t>(n) * sched.step_us;
    const double t = static_cast<double>(t_us) / 1e6;
    const auto lookup = trace.at(t);
    if (lookup.gap && gap_records.insert(lookup.index).second) {
      result.warnings.push_back("trace gap after t=" + format_double(lookup.record->timestamp_s) +
                                " s; holding snr_db=" + format_double(lookup.record->snr_db));
    }
    const double snr_db = lookup.record->snr_db;
    const IntervalMeasurement m = sim.measure(tones, snr_db, n);
    result.gross_errors += m.gross_errors;

    ProcessingIntervalLog row;
    row.interval = n;
    row.f2_hz = tones.f2;
    row.sigma_d_m = m.stats.sigma_d;
    row.mean_range_m = m.stats.mean_range;
    row.snr_db = snr_db;
    row.error_m = m.stats.sigma_d - config.target_sigma;
    row.timestamp_s = t;
    result.log.push_back(row);

    step(row, tones, result);
  }
  return result;
}

}  // namespace

IntervalMeasurement measure_interval(const ScenarioConfig& config, const TwoToneSpec& tones,
                                     double snr_db, std::size_t interval) {
  config.validate();
  IntervalSimulator sim(config);
  return sim.measure(tones, snr_db, interval);
}

RunResult run_fixed_bandwidth(const ScenarioConfig& config, const EnvironmentTrace& trace,
                              double duration_s) {
  return run_loop(config, trace, duration_s, config.waveform.two_tone,
                  [](const ProcessingIntervalLog&, TwoToneSpec&, RunResult&) {});
}

RunResult run_adaptive(const ScenarioConfig& config, const PiControllerState& controller,
                       const EnvironmentTrace& trace, double duration_s) {
  PiControllerState state = controller;
  const double f1 = config.waveform.two_tone.f1;
  state.x_max = std::min(state.x_max, config.f2_max - f1);
  state.x_min = std::max(state.x_min, 0.0);
  state.x_prev = std::clamp(config.waveform.two_tone.f2 - f1, state.x_min, state.x_max);
  state.validate();
  const double dt = static_cast<double>(config.interval_us()) / 1e6;
  bool first = true;

  return run_loop(config, trace, duration_s, config.waveform.two_tone,
                  [&](const ProcessingIntervalLog& row, TwoToneSpec& tones, RunResult& result) {
                    if (std::isnan(row.sigma_d_m)) {
                      throw std::runtime_error("run: sigma_d is NaN at interval " +
                                               std::to_string(row.interval) + " (f2=" +
                                               format_double(tones.f2) + " Hz)");
                    }
                    if (first) {
                      state.e_prev = row.error_m;
                      first = false;
                    }
                    const PiStepResult r = pi_step(state, row.error_m, dt);
                    state = r.state;
                    if (r.saturated) ++result.saturated_steps;
                    tones.f2 = f1 + r.x;
                  });
}

ClosedLoopPlant make_ranging_plant(const ScenarioConfig& config, const TuningPlantOptions& options) {
  config.validate();
  if (options.intervals < 4) throw std::invalid_argument("tuning plant: need at least 4 intervals");
  return [config, options](double k_p) {
    IntervalSimulator sim(config);
    const double f1 = config.waveform.two_tone.f1;
    PiControllerState state;
    state.k_p = k_p;
    state.t_i = 0.0;
    state.x_min = 0.0;
    state.x_max = config.f2_max - f1;
    state.x_prev = std::clamp(options.x0, state.x_min, state.x_max);
    const double dt = static_cast<double>(config.interval_us()) / 1e6;

    PlantResponse response;
    response.dt = dt;
    for (std::size_t n = 0; n < options.intervals; ++n) {
      const TwoToneSpec tones{f1, f1 + state.x_prev};
      response.output.push_back(state.x_prev);
      const auto m = sim.measure(tones, options.snr_db, n);
      const double e = m.stats.sigma_d - config.target_sigma;
      if (n == 0) state.e_prev = e;
      state = pi_step(state, e, dt).state;
    }
    return response;
  };
}

RunSummary summarize(const std::vector<ProcessingIntervalLog>& log, const ThresholdTable& table) {
  if (log.empty()) throw std::invalid_argument("summary: empty run log");
  RunSummary s;
  s.intervals = log.size();
  s.f2_min = s.f2_max = log.front().f2_hz;
  double sigma_sum = 0.0;
  double f2_sum = 0.0;
  for (const auto& row : log) {
    sigma_sum += row.sigma_d_m;
    f2_sum += row.f2_hz;
    s.max_sigma_d = std::max(s.max_sigma_d, row.sigma_d_m);
    s.f2_min = std::min(s.f2_min, row.f2_hz);
    s.f2_max = std::max(s.f2_max, row.f2_hz);
  }
  const auto n = static_cast<double>(log.size());
  s.mean_sigma_d = sigma_sum / n;
  s.f2_mean = f2_sum / n;
  s.f2_final = log.back().f2_hz;
  if (s.mean_sigma_d > 0.0) {
    for (const auto& [p, k] : table) {
      s.max_coherent_frequency_hz[p] = max_coherent_frequency(s.mean_sigma_d, p, table);
    }
  }
  return s;
}

namespace {
constexpr const char* kRunLogHeader = "interval,f2_hz,sigma_d_m,mean_range_m,snr_db,error_m,timestamp_s";
}

void write_run_log_csv(std::ostream& out, const std::vector<ProcessingIntervalLog>& log) {
  out << kRunLogHeader << '\n';
  for (const auto& r : log) {
    out << r.interval << ',' << format_double(r.f2_hz) << ',' << format_double(r.sigma_d_m) << ','
        << format_double(r.mean_range_m) << ',' << format_double(r.snr_db) << ','
        << format_double(r.error_m) << ',' << format_double(r.timestamp_s) << '\n';
  }
}

void write_run_log_csv(const std::string& path, const std::vector<ProcessingIntervalLog>& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("run log: cannot write " + path);
  write_run_log_csv(out, log);
}

std::vector<ProcessingIntervalLog> read_run_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("run log: line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogHeader) throw std::invalid_argument("run log: line 1: unexpected header");
  std::vector<ProcessingIntervalLog> log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) f.push_back(field);
    const std::string where = "run log: line " + std::to_string(line_no) + ": ";
    if (f.size() != 7) throw std::invalid_argument(where + "expected 7 fields");
    try {
      ProcessingIntervalLog r;
      const double idx = parse_double(f[0]);
      if (idx < 0 || idx != std::floor(idx)) throw std::invalid_argument("interval is not a count");
      r.interval = static_cast<std::size_t>(idx);
      r.f2_hz = parse_double(f[1]);
      r.sigma_d_m = parse_double(f[2]);
      r.mean_range_m = parse_double(f[3]);
      r.snr_db = parse_double(f[4]);
      r.error_m = parse_double(f[5]);
      r.timestamp_s = parse_double(f[6]);
      log.push_back(r);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  return log;
}

std::vector<ProcessingIntervalLog> read_run_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("run log: cannot open " + path);
  return read_run_log_csv(in);
}

}  // namespace cohsync
