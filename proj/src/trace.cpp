#include "cohsync/trace.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cohsync/rng.hpp"

namespace cohsync {

EnvironmentTrace::EnvironmentTrace(std::vector<EnvironmentRecord> records, double cadence_s)
    : records_(std::move(records)), cadence_(cadence_s) {
  if (records_.empty()) throw std::invalid_argument("trace: no records");
  if (!(cadence_ > 0.0)) throw std::invalid_argument("trace: cadence must be > 0");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!std::isfinite(r.timestamp_s) || std::isnan(r.snr_db)) {
      throw std::invalid_argument("trace: record " + std::to_string(i) +
                                  " has a non-finite timestamp or NaN snr");
    }
    if (i > 0 && !(r.timestamp_s > records_[i - 1].timestamp_s)) {
      throw std::invalid_argument("trace: timestamps must be strictly increasing (record " +
                                  std::to_string(i) + ")");
    }
  }
}

double EnvironmentTrace::start_s() const {
  if (records_.empty()) throw std::out_of_range("trace: empty");
  return records_.front().timestamp_s;
}

double EnvironmentTrace::end_s() const {
  if (records_.empty()) throw std::out_of_range("trace: empty");
  return records_.back().timestamp_s + cadence_;
}

EnvironmentTrace::Lookup EnvironmentTrace::at(double t) const {
  if (records_.empty() || t < start_s() || t >= end_s()) {
    throw std::out_of_range("trace: time " + format_double(t) + " s is outside the trace");
  }
  const auto it = std::upper_bound(records_.begin(), records_.end(), t,
                                   [](double v, const EnvironmentRecord& r) { return v < r.timestamp_s; });
  const auto index = static_cast<std::size_t>(std::distance(records_.begin(), it)) - 1;
  Lookup l;
  l.record = &records_[index];
  l.index = index;
  l.gap = t - l.record->timestamp_s >= cadence_;
  return l;
}

void TraceProgram::validate() const {
  if (segments.empty()) throw std::invalid_argument("trace program: no segments");
  if (!(cadence_s > 0.0)) throw std::invalid_argument("trace program: cadence must be > 0");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string where = "trace program: segment " + std::to_string(i);
    if (!std::isfinite(s.start_s) || !std::isfinite(s.end_s) || !(s.end_s > s.start_s)) {
      throw std::invalid_argument(where + " must have end_s > start_s");
    }
    if (std::isnan(s.snr_db) || std::isnan(s.snr_db_end)) throw std::invalid_argument(where + " has NaN snr");
    if (s.kind == SegmentKind::kAr1 && (!(std::abs(s.ar_phi) < 1.0) || !(s.ar_std >= 0.0))) {
      throw std::invalid_argument(where + " needs |ar_phi| < 1 and ar_std >= 0");
    }
    if (i > 0) {
      const double prev_end = segments[i - 1].end_s;
      if (s.start_s < prev_end) throw std::invalid_argument(where + " overlaps the previous segment");
      if (s.start_s > prev_end) throw std::invalid_argument(where + " leaves a gap after the previous segment");
    }
  }
}

std::vector<EnvironmentRecord> synthesize_trace(const TraceProgram& program, std::uint64_t seed) {
  program.validate();
  const double t0 = program.segments.front().start_s;
  const double t_end = program.segments.back().end_s;
  std::vector<EnvironmentRecord> out;

  std::size_t seg = 0;
  std::mt19937_64 eng;
  std::normal_distribution<double> normal(0.0, 1.0);
  double ar = 0.0;
  bool ar_started = false;
  std::size_t ar_segment = 0;

  for (std::size_t k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * program.cadence_s;
    if (t >= t_end) break;
    while (t >= program.segments[seg].end_s) ++seg;
    const auto& s = program.segments[seg];

    EnvironmentRecord r;
    r.timestamp_s = t;
    switch (s.kind) {
      case SegmentKind::kConstant:
        r.snr_db = s.snr_db;
        break;
      case SegmentKind::kRamp:
        r.snr_db = s.snr_db + (s.snr_db_end - s.snr_db) * (t - s.start_s) / (s.end_s - s.start_s);
        break;
      case SegmentKind::kAr1:
        if (!ar_started || ar_segment != seg) {
          eng.seed(derive_seed(seed, {seg}));
          normal.reset();
          ar = s.ar_std * normal(eng);
          ar_started = true;
          ar_segment = seg;
        } else {
          ar = s.ar_phi * ar + std::sqrt(1.0 - s.ar_phi * s.ar_phi) * s.ar_std * normal(eng);
        }
        r.snr_db = s.snr_db + ar;
        break;
    }
    r.wind_mps = s.wind_mps;
    r.humidity_pct = s.humidity_pct;
    r.rain_mmhr = s.rain_mmhr;
    r.temp_c = s.temp_c;
    out.push_back(r);
  }
  return out;
}

std::vector<EnvironmentRecord> apply_weather_model(std::vector<EnvironmentRecord> records,
                                                   const WeatherSnrModel& model,
                                                   std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& r : records) {
    const double z = normal(eng);
    r.snr_db -= model.rain_db_per_mmhr * r.rain_mmhr.value_or(0.0);
    r.snr_db -= model.humidity_db_per_pct * r.humidity_pct.value_or(0.0);
    r.snr_db += model.wind_jitter_db_per_mps * r.wind_mps.value_or(0.0) * z;
  }
  return records;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  if (first < last && *first == '+') ++first;
  double v = 0.0;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

namespace {

constexpr std::array<const char*, 6> kTraceColumns = {
    "timestamp_s", "snr_db", "wind_mps", "humidity_pct", "rain_mmhr", "temp_c"};

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::vector<EnvironmentRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trace csv: line 1: missing header");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::vector<int> column_of(header.size(), -1);
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::size_t c = 0; c < kTraceColumns.size(); ++c) {
      if (header[i] == kTraceColumns[c]) column_of[i] = static_cast<int>(c);
    }
    if (column_of[i] < 0) {
      throw std::invalid_argument("trace csv: line 1: unknown column '" + header[i] + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (column_of[j] == column_of[i]) {
        throw std::invalid_argument("trace csv: line 1: duplicate column '" + header[i] + "'");
      }
    }
  }
  for (int required : {0, 1}) {
    if (std::find(column_of.begin(), column_of.end(), required) == column_of.end()) {
      throw std::invalid_argument(std::string("trace csv: line 1: missing column ") +
                                  kTraceColumns[static_cast<std::size_t>(required)]);
    }
  }

  std::vector<EnvironmentRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    const std::string where = "trace csv: line " + std::to_string(line_no) + ": ";
    if (fields.size() != header.size()) {
      throw std::invalid_argument(where + "expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
    }
    EnvironmentRecord r;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const int c = column_of[i];
      if (fields[i].empty()) {
        if (c <= 1) throw std::invalid_argument(where + kTraceColumns[static_cast<std::size_t>(c)] + " is empty");
        continue;
      }
      double v = 0.0;
      try {
        v = parse_double(fields[i]);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + e.what());
      }
      switch (c) {
        case 0: r.timestamp_s = v; break;
        case 1: r.snr_db = v; break;
        case 2: r.wind_mps = v; break;
        case 3: r.humidity_pct = v; break;
        case 4: r.rain_mmhr = v; break;
        case 5: r.temp_c = v; break;
        default: break;
      }
    }
    if (!records.empty() && !(r.timestamp_s > records.back().timestamp_s)) {
      throw std::invalid_argument(where + "timestamps must be strictly increasing");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<EnvironmentRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trace csv: cannot open " + path);
  return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const std::vector<EnvironmentRecord>& records) {
  out << "timestamp_s,snr_db,wind_mps,humidity_pct,rain_mmhr,temp_c\n";
  for (const auto& r : records) {
    out << format_double(r.timestamp_s) << ',' << format_double(r.snr_db) << ','
        << opt_field(r.wind_mps) << ',' << opt_field(r.humidity_pct) << ','
        << opt_field(r.rain_mmhr) << ',' << opt_field(r.temp_c) << '\n';
  }
}

void write_trace_csv(const std::string& path, const std::vector<EnvironmentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("trace csv: cannot write " + path);
  write_trace_csv(out, records);
}

}  // namespace cohsync
