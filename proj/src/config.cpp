#include "cohsync/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cohsync {

namespace {

std::vector<double> default_sigma_grid() { return parse_grid("0:0.2:81"); }

std::string where(const std::string& source, const YAML::Mark& mark) {
  if (mark.is_null()) return source;
  return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, "'" + label() + "' must be a mapping");
  }

  bool has(const char* key) const { return static_cast<bool>(node_[key]); }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) return;
    if (!v.IsScalar()) fail(v, "'" + qualified(key) + "' must be a scalar");
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, "'" + qualified(key) + "' has the wrong type");
    }
  }

  void get_optional(const char* key, std::optional<double>& out) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v || v.IsNull()) return;
    double d = 0.0;
    get(key, d);
    out = d;
  }

  template <typename Enum>
  void get_enum(const char* key, Enum& out,
                std::initializer_list<std::pair<const char*, Enum>> names) {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    std::string options;
    for (const auto& [name, value] : names) {
      if (text == name) {
        out = value;
        return;
      }
      options += options.empty() ? name : std::string(", ") + name;
    }
    fail(node_[key], "'" + qualified(key) + "' must be one of: " + options);
  }

  void get_grid(const char* key, std::vector<double>& out) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v) return;
    try {
      if (v.IsSequence()) {
        out.clear();
        for (const auto& item : v) out.push_back(item.as<double>());
      } else if (v.IsScalar()) {
        out = parse_grid(v.as<std::string>());
      } else {
        fail(v, "'" + qualified(key) + "' must be a list or a lo:hi:n string");
      }
    } catch (const YAML::Exception&) {
      fail(v, "'" + qualified(key) + "' must contain numbers");
    } catch (const std::invalid_argument& e) {
      fail(v, "'" + qualified(key) + "': " + e.what());
    }
  }

  std::optional<Section> child(const char* key) {
    used_.insert(key);
    const YAML::Node v = node_[key];
    if (!v || v.IsNull()) return std::nullopt;
    return Section(v, qualified(key), source_);
  }

  YAML::Node raw(const char* key) {
    used_.insert(key);
    return node_[key];
  }

  /// Rejects keys that no getter asked for.
  void finish() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) fail(kv.first, "unknown key '" + qualified(key.c_str()) + "'");
    }
  }

  /// Runs a validator and reports its message at this section.
  template <typename F>
  void check(F&& validator) const {
    try {
      validator();
    } catch (const std::invalid_argument& e) {
      fail(node_, "invalid '" + label() + "': " + e.what());
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    throw ConfigError(where(source_, at.Mark()) + ": " + message);
  }

  const std::string& source() const { return source_; }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }
  std::string qualified(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

void read_waveform(Section& s, WaveformConfig& w) {
  s.get("f1", w.two_tone.f1);
  s.get("f2", w.two_tone.f2);
  s.get("f_d", w.f_d);
  s.get("ranging_pulse_width", w.ranging_pulse_width);
  s.get("disamb_pulse_width", w.disamb_pulse_width);
  s.get("pri", w.pri);
  s.get("sample_rate", w.sample_rate);
  s.get("disamb_amplitude", w.disamb_amplitude);
  s.finish();
  s.check([&] { w.validate(); });
}

void read_channel(Section& s, ChannelState& c) {
  s.get("true_range", c.true_range);
  s.get("repeater_gain", c.repeater_gain);
  s.get("f_c1", c.carrier.f_c1);
  s.get("f_c2", c.carrier.f_c2);
  s.get("offset1", c.carrier.offset1);
  s.get("offset2", c.carrier.offset2);
  s.finish();
  s.check([&] {
    ChannelState probe = c;
    probe.snr_db = 0.0;
    probe.validate();
  });
}

void read_estimator(Section& s, RefineOptions& e) {
  s.get("spline_half_width", e.spline_half_width);
  s.get("upsample", e.upsample);
  s.get("interp_half_taps", e.interp_half_taps);
  s.get("kaiser_beta", e.kaiser_beta);
  s.get("dense_oversampling", e.dense_oversampling);
  s.get("disambiguation", e.disambiguation);
  s.get("prior_lag", e.prior_lag);
  s.finish();
  s.check([&] { e.validate(); });
}

void read_controller(Section& s, PiControllerState& c) {
  s.get("k_p", c.k_p);
  s.get("t_i", c.t_i);
  s.get("x_min", c.x_min);
  s.get("x_max", c.x_max);
  s.get("error_unit", c.error_unit);
  s.get("output_unit", c.output_unit);
  s.finish();
  s.check([&] {
    PiControllerState probe = c;
    probe.x_prev = probe.x_min;
    probe.validate();
  });
}

void read_scenario(Section& s, RunConfig& rc) {
  auto& sc = rc.scenario;
  s.get("pulses_per_interval", sc.pulses_per_interval);
  s.get("group_size", sc.group_size);
  s.get("pulse_period_us", sc.pulse_period_us);
  s.get("target_sigma", sc.target_sigma);
  s.get("f2_max", sc.f2_max);
  s.get("duration_s", rc.duration_s);
  bool adaptive = rc.adaptive;
  s.get_enum("mode", adaptive, {{"adaptive", true}, {"fixed", false}});
  rc.adaptive = adaptive;
  s.finish();
  s.check([&] {
    if (!(rc.duration_s >= 0.0)) throw std::invalid_argument("duration_s must be >= 0");
  });
}

void read_montecarlo(Section& s, MonteCarloConfig& m) {
  auto& a = m.array;
  s.get("n_nodes", a.n_nodes);
  s.get("wavelength", a.wavelength);
  s.get("theta_min", a.theta_range.lo);
  s.get("theta_max", a.theta_range.hi);
  s.get_optional("fixed_theta", a.fixed_theta);
  s.get("node_spacing_min", a.node_spacing_range.lo);
  s.get("node_spacing_max", a.node_spacing_range.hi);
  s.get("sync_distance_min", a.sync_distance_range.lo);
  s.get("sync_distance_max", a.sync_distance_range.hi);
  s.get("calib_error", a.calib_error);
  s.get_enum("sync_phase", a.sync_phase,
             {{"none", SyncPhaseModel::kNone},
              {"ranging_coupled", SyncPhaseModel::kRangingCoupled},
              {"gaussian", SyncPhaseModel::kGaussian}});
  s.get("sync_phase_sigma", a.sync_phase_sigma);
  s.get("reference_node_exact", a.reference_node_exact);
  s.get_enum("channel", a.channel,
             {{"unity", ChannelMagnitude::kUnity}, {"rayleigh", ChannelMagnitude::kRayleigh}});
  s.get("threshold", m.threshold);
  s.get("trials", m.trials);
  s.get_grid("sigma_grid", m.sigma_grid);
  s.get_grid("probabilities", m.probabilities);
  s.finish();
  s.check([&] {
    a.validate();
    if (m.trials == 0) throw std::invalid_argument("trials must be > 0");
    if (m.sigma_grid.empty()) throw std::invalid_argument("sigma_grid is empty");
  });
}

void read_trace_program(Section& s, TraceProgram& p) {
  s.get("cadence_s", p.cadence_s);
  const YAML::Node segs = s.raw("segments");
  if (!segs || !segs.IsSequence()) s.fail(segs ? segs : YAML::Node(), "'trace_program.segments' must be a list");
  p.segments.clear();
  std::size_t i = 0;
  for (const auto& node : segs) {
    Section seg(node, "trace_program.segments[" + std::to_string(i++) + "]", s.source());
    TraceSegment t;
    seg.get("start_s", t.start_s);
    seg.get("end_s", t.end_s);
    seg.get_enum("kind", t.kind,
                 {{"constant", SegmentKind::kConstant},
                  {"ramp", SegmentKind::kRamp},
                  {"ar1", SegmentKind::kAr1}});
    seg.get("snr_db", t.snr_db);
    t.snr_db_end = t.snr_db;
    seg.get("snr_db_end", t.snr_db_end);
    seg.get("ar_phi", t.ar_phi);
    seg.get("ar_std", t.ar_std);
    seg.get_optional("wind_mps", t.wind_mps);
    seg.get_optional("humidity_pct", t.humidity_pct);
    seg.get_optional("rain_mmhr", t.rain_mmhr);
    seg.get_optional("temp_c", t.temp_c);
    seg.finish();
    p.segments.push_back(t);
  }
  s.finish();
  s.check([&] { p.validate(); });
}

void read_weather(Section& s, WeatherSnrModel& w) {
  s.get("rain_db_per_mmhr", w.rain_db_per_mmhr);
  s.get("humidity_db_per_pct", w.humidity_db_per_pct);
  s.get("wind_jitter_db_per_mps", w.wind_jitter_db_per_mps);
  s.finish();
}

void read_tuning(Section& s, TuningConfig& t) {
  s.get("snr_db", t.plant.snr_db);
  s.get("x0", t.plant.x0);
  s.get("intervals", t.plant.intervals);
  s.get_grid("k_grid", t.k_grid);
  s.get("transient_fraction", t.criteria.transient_fraction);
  s.get("min_periods", t.criteria.min_periods);
  s.get("decay_tolerance", t.criteria.decay_tolerance);
  s.get("min_peak_to_peak", t.criteria.min_peak_to_peak);
  s.finish();
  s.check([&] {
    if (t.plant.intervals < 4) throw std::invalid_argument("intervals must be >= 4");
    if (!(t.plant.x0 > 0.0)) throw std::invalid_argument("x0 must be > 0");
  });
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  PiControllerState probe = controller;
  probe.x_prev = probe.x_min;
  probe.validate();
  montecarlo.array.validate();
  if (montecarlo.trials == 0) throw std::invalid_argument("montecarlo: trials must be > 0");
  if (montecarlo.sigma_grid.empty()) throw std::invalid_argument("montecarlo: sigma_grid is empty");
  if (trace_program) trace_program->validate();
  if (!(duration_s >= 0.0)) throw std::invalid_argument("duration_s must be >= 0");
}

RunConfig load_config_string(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(where(source, e.mark) + ": " + e.msg);
  }
  RunConfig rc;
  rc.montecarlo.sigma_grid = default_sigma_grid();
  if (!root || root.IsNull()) return rc;

  Section top(root, "", source);
  if (top.has("seed")) rc.seed_set = true;
  top.get("seed", rc.seed);
  rc.scenario.seed = rc.seed;
  if (auto s = top.child("waveform")) read_waveform(*s, rc.scenario.waveform);
  if (auto s = top.child("channel")) read_channel(*s, rc.scenario.channel);
  if (auto s = top.child("estimator")) read_estimator(*s, rc.scenario.estimator);
  if (auto s = top.child("controller")) read_controller(*s, rc.controller);
  if (auto s = top.child("scenario")) read_scenario(*s, rc);
  if (auto s = top.child("montecarlo")) read_montecarlo(*s, rc.montecarlo);
  if (auto s = top.child("trace_program")) {
    TraceProgram p;
    read_trace_program(*s, p);
    rc.trace_program = p;
  }
  if (auto s = top.child("weather_model")) {
    WeatherSnrModel w;
    read_weather(*s, w);
    rc.weather_model = w;
  }
  if (auto s = top.child("tuning")) read_tuning(*s, rc.tuning);
  top.finish();
  top.check([&] { rc.validate(); });
  return rc;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_string(ss.str(), path);
}

namespace {

const char* segment_kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::kConstant: return "constant";
    case SegmentKind::kRamp: return "ramp";
    case SegmentKind::kAr1: return "ar1";
  }
  return "constant";
}

const char* sync_phase_name(SyncPhaseModel m) {
  switch (m) {
    case SyncPhaseModel::kNone: return "none";
    case SyncPhaseModel::kRangingCoupled: return "ranging_coupled";
    case SyncPhaseModel::kGaussian: return "gaussian";
  }
  return "none";
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::string config_to_json(const RunConfig& rc, int indent) {
  using J = nlohmann::ordered_json;
  const auto& sc = rc.scenario;
  const auto& w = sc.waveform;
  const auto& a = rc.montecarlo.array;
  J j;
  j["seed"] = rc.seed;
  j["waveform"] = {{"f1", w.two_tone.f1},
                   {"f2", w.two_tone.f2},
                   {"f_d", w.f_d},
                   {"ranging_pulse_width", w.ranging_pulse_width},
                   {"disamb_pulse_width", w.disamb_pulse_width},
                   {"pri", w.pri},
                   {"sample_rate", w.sample_rate},
                   {"disamb_amplitude", w.disamb_amplitude}};
  j["channel"] = {{"true_range", sc.channel.true_range},
                  {"repeater_gain", sc.channel.repeater_gain},
                  {"f_c1", sc.channel.carrier.f_c1},
                  {"f_c2", sc.channel.carrier.f_c2},
                  {"offset1", sc.channel.carrier.offset1},
                  {"offset2", sc.channel.carrier.offset2}};
  j["estimator"] = {{"spline_half_width", sc.estimator.spline_half_width},
                    {"upsample", sc.estimator.upsample},
                    {"interp_half_taps", sc.estimator.interp_half_taps},
                    {"kaiser_beta", sc.estimator.kaiser_beta},
                    {"dense_oversampling", sc.estimator.dense_oversampling},
                    {"disambiguation", sc.estimator.disambiguation},
                    {"prior_lag", sc.estimator.prior_lag}};
  j["controller"] = {{"k_p", rc.controller.k_p},
                     {"t_i", rc.controller.t_i},
                     {"x_min", rc.controller.x_min},
                     {"x_max", rc.controller.x_max},
                     {"error_unit", rc.controller.error_unit},
                     {"output_unit", rc.controller.output_unit}};
  j["scenario"] = {{"pulses_per_interval", sc.pulses_per_interval},
                   {"group_size", sc.group_size},
                   {"pulse_period_us", sc.pulse_period_us},
                   {"target_sigma", sc.target_sigma},
                   {"f2_max", sc.f2_max},
                   {"duration_s", rc.duration_s},
                   {"mode", rc.adaptive ? "adaptive" : "fixed"}};
  j["montecarlo"] = {{"n_nodes", a.n_nodes},
                     {"wavelength", a.wavelength},
                     {"theta_min", a.theta_range.lo},
                     {"theta_max", a.theta_range.hi},
                     {"fixed_theta", optional_json(a.fixed_theta)},
                     {"node_spacing_min", a.node_spacing_range.lo},
                     {"node_spacing_max", a.node_spacing_range.hi},
                     {"sync_distance_min", a.sync_distance_range.lo},
                     {"sync_distance_max", a.sync_distance_range.hi},
                     {"calib_error", a.calib_error},
                     {"sync_phase", sync_phase_name(a.sync_phase)},
                     {"sync_phase_sigma", a.sync_phase_sigma},
                     {"reference_node_exact", a.reference_node_exact},
                     {"channel", a.channel == ChannelMagnitude::kUnity ? "unity" : "rayleigh"},
                     {"threshold", rc.montecarlo.threshold},
                     {"trials", rc.montecarlo.trials},
                     {"sigma_grid", rc.montecarlo.sigma_grid},
                     {"probabilities", rc.montecarlo.probabilities}};
  if (rc.trace_program) {
    J segs = J::array();
    for (const auto& s : rc.trace_program->segments) {
      segs.push_back({{"start_s", s.start_s},
                      {"end_s", s.end_s},
                      {"kind", segment_kind_name(s.kind)},
                      {"snr_db", s.snr_db},
                      {"snr_db_end", s.snr_db_end},
                      {"ar_phi", s.ar_phi},
                      {"ar_std", s.ar_std},
                      {"wind_mps", optional_json(s.wind_mps)},
                      {"humidity_pct", optional_json(s.humidity_pct)},
                      {"rain_mmhr", optional_json(s.rain_mmhr)},
                      {"temp_c", optional_json(s.temp_c)}});
    }
    j["trace_program"] = {{"cadence_s", rc.trace_program->cadence_s}, {"segments", segs}};
  }
  if (rc.weather_model) {
    j["weather_model"] = {{"rain_db_per_mmhr", rc.weather_model->rain_db_per_mmhr},
                          {"humidity_db_per_pct", rc.weather_model->humidity_db_per_pct},
                          {"wind_jitter_db_per_mps", rc.weather_model->wind_jitter_db_per_mps}};
  }
  j["tuning"] = {{"snr_db", rc.tuning.plant.snr_db},
                 {"x0", rc.tuning.plant.x0},
                 {"intervals", rc.tuning.plant.intervals},
                 {"k_grid", rc.tuning.k_grid},
                 {"transient_fraction", rc.tuning.criteria.transient_fraction},
                 {"min_periods", rc.tuning.criteria.min_periods},
                 {"decay_tolerance", rc.tuning.criteria.decay_tolerance},
                 {"min_peak_to_peak", rc.tuning.criteria.min_peak_to_peak}};
  return j.dump(indent);
}

std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) throw std::invalid_argument("empty grid");
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(spec);
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3) throw std::invalid_argument("grid '" + spec + "' is not lo:hi:n");
    const double lo = parse_double(parts[0]);
    const double hi = parse_double(parts[1]);
    const double n = parse_double(parts[2]);
    if (!(n >= 1.0) || n != std::floor(n)) throw std::invalid_argument("grid count must be a positive integer");
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("grid bounds must be finite");
    const auto count = static_cast<std::size_t>(n);
    if (count == 1) {
      if (lo != hi) throw std::invalid_argument("a one-point grid needs lo == hi");
      return {lo};
    }
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return out;
  }
  std::string item;
  std::istringstream ss(spec);
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

}  // namespace cohsync
