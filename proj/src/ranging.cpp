#include "cohsync/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cohsync/constants.hpp"
#include "cohsync/fft.hpp"

namespace cohsync {

MatchedFilter::MatchedFilter(ComplexBasebandSignal tmpl) : template_(std::move(tmpl)) {
  if (template_.empty() || !(template_.energy() > 0.0)) {
    throw std::invalid_argument("matched filter: template must have nonzero energy");
  }
}

MatchedFilterOutput MatchedFilter::apply(const ComplexBasebandSignal& received) const {
  if (received.empty()) throw std::invalid_argument("matched filter: empty received window");
  if (received.sample_rate() != template_.sample_rate()) {
    throw std::invalid_argument("matched filter: sample rate mismatch");
  }
  const std::size_t nr = received.size();
  const std::size_t nt = template_.size();
  const std::size_t total = nr + nt - 1;
  const std::size_t n = fft::next_pow2(total);
  if (cached_size_ != n) {
    cached_conj_spectrum_ = fft::forward(template_.samples(), n);
    for (auto& v : cached_conj_spectrum_) v = std::conj(v);
    cached_size_ = n;
  }
  auto spectrum = fft::forward(received.samples(), n);
  for (std::size_t k = 0; k < n; ++k) spectrum[k] *= cached_conj_spectrum_[k];
  const auto circular = fft::inverse(spectrum, n);

  // Negative lags wrap to the end of the circular result.
  std::vector<Complex> linear(total);
  for (std::size_t i = 0; i + 1 < nt; ++i) linear[i] = circular[n - (nt - 1) + i];
  for (std::size_t i = 0; i < nr; ++i) linear[nt - 1 + i] = circular[i];

  MatchedFilterOutput out;
  out.values = ComplexBasebandSignal(std::move(linear), received.sample_rate());
  out.zero_lag_index = static_cast<std::ptrdiff_t>(nt - 1);
  out.template_energy = template_.energy();
  return out;
}

MatchedFilterOutput matched_filter(const ComplexBasebandSignal& received,
                                   const ComplexBasebandSignal& tmpl) {
  return MatchedFilter(tmpl).apply(received);
}

void RefineOptions::validate() const {
  if (spline_half_width < 1 || upsample < 1 || interp_half_taps < 1 ||
      dense_oversampling < 1 || !(kaiser_beta >= 0.0)) {
    throw std::invalid_argument("refine: invalid interpolation options");
  }
}

PeakRefiner::PeakRefiner(const RefineOptions& options)
    : options_(options),
      interp_(options.interp_half_taps, options.kaiser_beta, options.upsample) {
  options_.validate();
}

double PeakRefiner::refine(std::span<const Complex> values, std::size_t peak_index,
                           int half_width) const {
  const int u = options_.upsample;
  const long p = static_cast<long>(peak_index);
  const int knots = 2 * half_width * u + 1;
  std::vector<double> xs(static_cast<std::size_t>(knots));
  std::vector<double> ys(static_cast<std::size_t>(knots));
  for (int i = 0; i < knots; ++i) {
    const long n = p - half_width + i / u;
    const int j = i % u;
    xs[static_cast<std::size_t>(i)] = static_cast<double>(n) + static_cast<double>(j) / u;
    ys[static_cast<std::size_t>(i)] = std::norm(interp_.at(values, n, j));
  }
  const NaturalCubicSpline spline(std::move(xs), std::move(ys));

  // Dense scan over [p - 1, p + 1], then the exact maximum next to the best
  // grid point.
  const double lo = static_cast<double>(p - 1);
  const int steps = 2 * options_.dense_oversampling;
  const double step = 1.0 / options_.dense_oversampling;
  double best_t = lo;
  double best_v = spline(lo);
  for (int i = 1; i <= steps; ++i) {
    const double t = lo + i * step;
    const double v = spline(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  return spline.argmax(std::max(lo, best_t - step), std::min(lo + 2.0, best_t + step));
}

namespace {

std::size_t argmax_magnitude(std::span<const Complex> v, std::size_t lo, std::size_t hi) {
  std::size_t best = lo;
  double best_v = std::norm(v[lo]);
  for (std::size_t i = lo + 1; i <= hi; ++i) {
    const double m = std::norm(v[i]);
    if (m > best_v) {
      best_v = m;
      best = i;
    }
  }
  return best;
}

}  // namespace

RangeEstimate disambiguate_and_refine(const MatchedFilterOutput& mf_ranging,
                                      const MatchedFilterOutput& mf_disamb,
                                      const WaveformConfig& spec,
                                      const RefineOptions& options) {
  const PeakRefiner refiner(options);
  return disambiguate_and_refine(mf_ranging, mf_disamb, spec, refiner, options);
}

RangeEstimate disambiguate_and_refine(const MatchedFilterOutput& mf_ranging,
                                      const MatchedFilterOutput& mf_disamb,
                                      const WaveformConfig& spec, const PeakRefiner& refiner,
                                      const RefineOptions& options) {
  const double fs = spec.sample_rate;
  if (mf_ranging.values.empty()) throw std::invalid_argument("ranging: empty matched-filter output");
  if (mf_ranging.values.sample_rate() != fs) {
    throw std::invalid_argument("ranging: matched-filter sample rate differs from waveform");
  }
  const auto rvals = mf_ranging.values.samples();
  const int half_width = options.spline_half_width;

  double coarse = options.prior_lag * fs;  // samples
  if (options.disambiguation) {
    if (mf_disamb.values.empty()) throw std::invalid_argument("ranging: empty disambiguation output");
    if (mf_disamb.values.sample_rate() != fs) {
      throw std::invalid_argument("ranging: disambiguation sample rate differs from waveform");
    }
    const auto dvals = mf_disamb.values.samples();
    const std::size_t pd = argmax_magnitude(dvals, 0, dvals.size() - 1);
    coarse = refiner.refine(dvals, pd, half_width) - static_cast<double>(mf_disamb.zero_lag_index);
  }

  const double separation = spec.two_tone.separation();
  const double spacing = separation > 0.0 ? fs / separation : std::numeric_limits<double>::infinity();
  const double zr = static_cast<double>(mf_ranging.zero_lag_index);
  const double last = static_cast<double>(rvals.size() - 1);

  RangeEstimate est;
  double lo_f = 0.0;
  double hi_f = last;
  if (std::isfinite(spacing)) {
    lo_f = std::max(0.0, std::ceil(coarse - 0.5 * spacing + zr));
    hi_f = std::min(last, std::floor(coarse + 0.5 * spacing + zr));
  }
  if (hi_f < lo_f) {
    // No two-tone lag lies within half a lobe of the coarse lag.
    est.gross_error = true;
    lo_f = hi_f = std::clamp(std::round(coarse + zr), 0.0, last);
  }
  const std::size_t p = argmax_magnitude(rvals, static_cast<std::size_t>(lo_f),
                                         static_cast<std::size_t>(hi_f));
  const double refined_index = refiner.refine(rvals, p, half_width);
  const double lag = refined_index - zr;

  if (std::isfinite(spacing) && std::abs(lag - coarse) > 0.5 * spacing) est.gross_error = true;
  est.ambiguity_index = std::isfinite(spacing) ? std::lround(lag / spacing) : 0;
  est.peak_lag = lag / fs;
  est.coarse_lag = coarse / fs;
  est.range = std::max(0.0, 0.5 * kSpeedOfLight * est.peak_lag);

  if (std::isfinite(options.noise_variance) && options.noise_variance > 0.0 &&
      mf_ranging.template_energy > 0.0) {
    const double peak_power = std::norm(rvals[p]);
    est.snr_post_db =
        10.0 * std::log10(peak_power / (mf_ranging.template_energy * options.noise_variance));
  }
  return est;
}

double average_range(std::span<const double> estimates) {
  if (estimates.empty()) throw std::invalid_argument("average_range: no estimates");
  return std::accumulate(estimates.begin(), estimates.end(), 0.0) /
         static_cast<double>(estimates.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("sample_stddev: need at least two values");
  const double mean = average_range(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

RangeWindowStats window_stats(std::span<const double> estimates, std::size_t window,
                              std::size_t group_size) {
  if (group_size == 0 || window == 0 || window % group_size != 0 || window / group_size < 2) {
    throw std::invalid_argument("window_stats: window must hold at least two whole groups");
  }
  if (estimates.size() != window) {
    throw std::invalid_argument("window_stats: expected " + std::to_string(window) +
                                " estimates, got " + std::to_string(estimates.size()));
  }
  RangeWindowStats stats;
  stats.estimates.assign(estimates.begin(), estimates.end());
  const std::size_t groups = window / group_size;
  stats.group_means.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    stats.group_means.push_back(average_range(estimates.subspan(g * group_size, group_size)));
  }
  stats.sigma_d = sample_stddev(stats.group_means);
  stats.mean_range = average_range(estimates);
  return stats;
}

RangingChain::RangingChain(WaveformConfig config, RefineOptions options)
    : config_((config.validate(), config)),
      options_(options),
      ranging_(generate_two_tone(config_.two_tone, config_.ranging_pulse_width,
                                 config_.sample_rate)),
      disamb_(generate_disambiguation(config_.f_d, config_.sample_rate,
                                      config_.disamb_amplitude)),
      refiner_(options_) {}

RangeEstimate RangingChain::estimate(const ComplexBasebandSignal& rx_ranging,
                                     const ComplexBasebandSignal& rx_disamb) const {
  return estimate(rx_ranging, rx_disamb, options_.noise_variance);
}

RangeEstimate RangingChain::estimate(const ComplexBasebandSignal& rx_ranging,
                                     const ComplexBasebandSignal& rx_disamb,
                                     double noise_variance) const {
  RefineOptions opts = options_;
  opts.noise_variance = noise_variance;
  const auto mf_r = ranging_.apply(rx_ranging);
  if (!opts.disambiguation) {
    return disambiguate_and_refine(mf_r, MatchedFilterOutput{}, config_, refiner_, opts);
  }
  const auto mf_d = disamb_.apply(rx_disamb);
  return disambiguate_and_refine(mf_r, mf_d, config_, refiner_, opts);
}

}  // namespace cohsync
