#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cohsync/interp.hpp"
#include "cohsync/signal.hpp"

namespace cohsync {

/// Cross-correlation of a received window against a template, over every lag
/// with at least one overlapping sample. Element i holds lag
/// i - zero_lag_index (in samples); lags in [0, received - template] are the
/// full-overlap region.
struct MatchedFilterOutput {
  ComplexBasebandSignal values;
  std::ptrdiff_t zero_lag_index = 0;
  double template_energy = 0.0;

  std::ptrdiff_t lag_of(std::size_t index) const noexcept {
    return static_cast<std::ptrdiff_t>(index) - zero_lag_index;
  }
};

/// FFT-based matched filter with the template spectrum cached per transform
/// size. Not safe to share across threads; use one instance per thread.
class MatchedFilter {
 public:
  explicit MatchedFilter(ComplexBasebandSignal tmpl);

  MatchedFilterOutput apply(const ComplexBasebandSignal& received) const;
  const ComplexBasebandSignal& templ() const noexcept { return template_; }

 private:
  ComplexBasebandSignal template_;
  mutable std::size_t cached_size_ = 0;
  mutable std::vector<Complex> cached_conj_spectrum_;
};

/// y[l] = sum_k received[k + l] * conj(template[k]).
MatchedFilterOutput matched_filter(const ComplexBasebandSignal& received,
                                   const ComplexBasebandSignal& tmpl);

struct RefineOptions {
  int spline_half_width = 4;     // spline knots span the peak sample +/- this many samples
  int upsample = 16;             // band-limited knots per sample inside the spline span
  int interp_half_taps = 64;     // windowed-sinc kernel half length, samples
  double kaiser_beta = 12.0;
  int dense_oversampling = 64;   // coarse grid for locating the spline maximum
  bool disambiguation = true;
  /// Lag (s) used to choose the two-tone lobe when disambiguation is off.
  double prior_lag = 0.0;
  /// Per-sample receiver noise variance used for snr_post; NaN leaves it unset.
  double noise_variance = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
};

struct RangeEstimate {
  double range = 0.0;          // m, one-way
  double peak_lag = 0.0;       // s, refined two-tone peak
  double coarse_lag = 0.0;     // s, disambiguation (or prior) lag
  long ambiguity_index = 0;    // two-tone lobe index counted from zero lag
  double snr_post_db = std::numeric_limits<double>::quiet_NaN();
  bool gross_error = false;    // refined peak farther than half a lobe from the coarse lag
};

/// Peak refinement shared by both correlators: band-limited upsampling of
/// |y|^2 around the peak sample, natural cubic spline through the upsampled
/// points, and the exact spline maximum within +/- 1 sample of the peak.
/// Returns a fractional index into `values`.
class PeakRefiner {
 public:
  explicit PeakRefiner(const RefineOptions& options = {});

  double refine(std::span<const Complex> values, std::size_t peak_index,
                int half_width) const;

 private:
  RefineOptions options_;
  WindowedSincInterpolator interp_;
};

/// Locates the disambiguation main lobe, selects the nearest two-tone lobe,
/// refines it and converts the lag to range. Both inputs must share a lag
/// axis at the waveform's sample rate.
RangeEstimate disambiguate_and_refine(const MatchedFilterOutput& mf_ranging,
                                      const MatchedFilterOutput& mf_disamb,
                                      const WaveformConfig& spec,
                                      const RefineOptions& options = {});

/// Same as above with a caller-owned refiner (avoids rebuilding the kernel).
RangeEstimate disambiguate_and_refine(const MatchedFilterOutput& mf_ranging,
                                      const MatchedFilterOutput& mf_disamb,
                                      const WaveformConfig& spec, const PeakRefiner& refiner,
                                      const RefineOptions& options);

struct RangeWindowStats {
  std::vector<double> estimates;
  std::vector<double> group_means;
  double sigma_d = 0.0;     // sample std (N - 1) of the group means
  double mean_range = 0.0;
};

/// Groups `window` consecutive estimates into blocks of `group_size`, in
/// order, and takes the sample standard deviation of the block means.
RangeWindowStats window_stats(std::span<const double> estimates, std::size_t window = 200,
                              std::size_t group_size = 5);

/// Plain average of N estimates.
double average_range(std::span<const double> estimates);

/// Sample standard deviation with N - 1 normalization.
double sample_stddev(std::span<const double> values);

/// Waveform, templates and matched filters for one waveform configuration.
class RangingChain {
 public:
  explicit RangingChain(WaveformConfig config, RefineOptions options = {});

  const WaveformConfig& config() const noexcept { return config_; }
  const ComplexBasebandSignal& ranging_pulse() const noexcept { return ranging_.templ(); }
  const ComplexBasebandSignal& disamb_pulse() const noexcept { return disamb_.templ(); }

  RangeEstimate estimate(const ComplexBasebandSignal& rx_ranging,
                         const ComplexBasebandSignal& rx_disamb) const;

  /// Same, overriding the per-call noise variance used for snr_post.
  RangeEstimate estimate(const ComplexBasebandSignal& rx_ranging,
                         const ComplexBasebandSignal& rx_disamb, double noise_variance) const;

 private:
  WaveformConfig config_;
  RefineOptions options_;
  MatchedFilter ranging_;
  MatchedFilter disamb_;
  PeakRefiner refiner_;
};

}  // namespace cohsync
