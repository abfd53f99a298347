#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cohsync {

/// One environment sample. snr_db is the per-sample receive SNR at node A;
/// the weather columns are metadata unless a weather mapping is applied.
struct EnvironmentRecord {
  double timestamp_s = 0.0;
  double snr_db = 0.0;
  std::optional<double> wind_mps;
  std::optional<double> humidity_pct;
  std::optional<double> rain_mmhr;
  std::optional<double> temp_c;
};

/// Time-ordered records, each held until the next one. A record older than
/// `cadence_s` at lookup time marks a gap: its value is still used.
class EnvironmentTrace {
 public:
  EnvironmentTrace() = default;
  /// Throws std::invalid_argument on an empty trace or timestamps that are
  /// not strictly increasing.
  explicit EnvironmentTrace(std::vector<EnvironmentRecord> records, double cadence_s = 60.0);

  struct Lookup {
    const EnvironmentRecord* record = nullptr;
    std::size_t index = 0;
    bool gap = false;
  };

  /// Nearest previous record. Throws std::out_of_range before the first
  /// record or at/after end_s().
  Lookup at(double t) const;

  const std::vector<EnvironmentRecord>& records() const noexcept { return records_; }
  double cadence() const noexcept { return cadence_; }
  double start_s() const;
  /// Last timestamp plus one cadence.
  double end_s() const;

 private:
  std::vector<EnvironmentRecord> records_;
  double cadence_ = 60.0;
};

enum class SegmentKind { kConstant, kRamp, kAr1 };

/// SNR program over [start_s, end_s). kConstant holds snr_db; kRamp goes
/// linearly from snr_db at start_s towards snr_db_end at end_s; kAr1 adds
/// x[k] = phi x[k-1] + sqrt(1 - phi^2) ar_std w[k] to snr_db, started from
/// its stationary distribution.
struct TraceSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  SegmentKind kind = SegmentKind::kConstant;
  double snr_db = 20.0;
  double snr_db_end = 20.0;
  double ar_phi = 0.9;
  double ar_std = 1.0;
  std::optional<double> wind_mps;
  std::optional<double> humidity_pct;
  std::optional<double> rain_mmhr;
  std::optional<double> temp_c;
};

struct TraceProgram {
  std::vector<TraceSegment> segments;
  double cadence_s = 60.0;

  /// Throws std::invalid_argument for overlapping or non-contiguous
  /// segments, empty segments and bad AR parameters.
  void validate() const;
};

/// Records at start + k * cadence_s covering every segment. Segment i's AR
/// stream is seeded with derive_seed(seed, {i}).
std::vector<EnvironmentRecord> synthesize_trace(const TraceProgram& program, std::uint64_t seed);

/// Toy, non-physical weather coupling for qualitative demos: rain and
/// humidity lower the mean SNR linearly and wind adds Gaussian jitter with
/// standard deviation proportional to wind speed.
struct WeatherSnrModel {
  double rain_db_per_mmhr = 0.5;
  double humidity_db_per_pct = 0.02;
  double wind_jitter_db_per_mps = 0.3;
};

std::vector<EnvironmentRecord> apply_weather_model(std::vector<EnvironmentRecord> records,
                                                   const WeatherSnrModel& model,
                                                   std::uint64_t seed);

/// Header: timestamp_s,snr_db[,wind_mps][,humidity_pct][,rain_mmhr][,temp_c].
/// Optional columns may be absent or empty; column order follows the header.
/// Errors carry the 1-based line number.
std::vector<EnvironmentRecord> read_trace_csv(std::istream& in);
std::vector<EnvironmentRecord> read_trace_csv(const std::string& path);

/// Writes every column; absent optional values are left empty.
void write_trace_csv(std::ostream& out, const std::vector<EnvironmentRecord>& records);
void write_trace_csv(const std::string& path, const std::vector<EnvironmentRecord>& records);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
/// Strict parse of a whole field; throws std::invalid_argument.
double parse_double(const std::string& text);

}  // namespace cohsync
