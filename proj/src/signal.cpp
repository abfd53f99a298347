#include "cohsync/signal.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cohsync/constants.hpp"
#include "cohsync/fft.hpp"

namespace cohsync {

namespace {

// Nearest integer, ties to even: 143.7 us at 25 Msps is exactly 3592.5.
std::size_t sample_count(double x) {
  const double lo = std::floor(x);
  const double frac = x - lo;
  double r = lo;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(lo, 2.0) != 0.0)) r = lo + 1.0;
  return static_cast<std::size_t>(r);
}

}  // namespace

ComplexBasebandSignal::ComplexBasebandSignal(std::vector<Complex> samples,
                                             double sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("signal: sample_rate must be positive and finite");
  }
}

double ComplexBasebandSignal::energy() const noexcept {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0,
                         [](double acc, Complex v) { return acc + std::norm(v); });
}

double ComplexBasebandSignal::mean_power() const noexcept {
  return samples_.empty() ? 0.0 : energy() / static_cast<double>(samples_.size());
}

double ComplexBasebandSignal::duration() const noexcept {
  return static_cast<double>(samples_.size()) / sample_rate_;
}

void TwoToneSpec::validate(double sample_rate) const {
  if (!std::isfinite(f1) || !std::isfinite(f2) || f1 < 0.0 || f2 < f1) {
    throw std::invalid_argument("two-tone: require 0 <= f1 <= f2");
  }
  if (f2 >= 0.5 * sample_rate) {
    throw std::invalid_argument("two-tone: f2 = " + std::to_string(f2) +
                                " Hz aliases at sample rate " +
                                std::to_string(sample_rate) + " Hz");
  }
}

void WaveformConfig::validate() const {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("waveform: sample_rate must be > 0");
  two_tone.validate(sample_rate);
  if (!(f_d > 0.0) || f_d >= 0.5 * sample_rate) {
    throw std::invalid_argument("waveform: require 0 < f_d < sample_rate / 2");
  }
  if (!(ranging_pulse_width > 0.0) || !(disamb_pulse_width > 0.0)) {
    throw std::invalid_argument("waveform: pulse widths must be > 0");
  }
  if (ranging_pulse_width * sample_rate < 2.0) {
    throw std::invalid_argument("waveform: ranging pulse shorter than two samples");
  }
  if (std::abs(disamb_pulse_width - 1.0 / f_d) > 1.0 / sample_rate) {
    throw std::invalid_argument(
        "waveform: disambiguation pulse must span one period of f_d");
  }
  if (pri < std::max(ranging_pulse_width, disamb_pulse_width)) {
    throw std::invalid_argument("waveform: pri shorter than a pulse");
  }
  if (!(disamb_amplitude > 0.0)) {
    throw std::invalid_argument("waveform: disamb_amplitude must be > 0");
  }
}

double disambiguation_frequency_for(const TwoToneSpec& spec) noexcept {
  return 0.5 * spec.delta_f();
}

ComplexBasebandSignal generate_two_tone(const TwoToneSpec& spec, double width,
                                        double sample_rate) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("two-tone: sample_rate must be > 0");
  if (!(width > 0.0)) throw std::invalid_argument("two-tone: width must be > 0");
  spec.validate(sample_rate);
  const auto n = sample_count(width * sample_rate);
  if (n < 2) throw std::invalid_argument("two-tone: pulse shorter than two samples");

  std::vector<Complex> s(n);
  const double w1 = kTwoPi * spec.f1 / sample_rate;
  const double w2 = kTwoPi * spec.f2 / sample_rate;
  for (std::size_t k = 0; k < n; ++k) {
    const auto kd = static_cast<double>(k);
    s[k] = std::polar(1.0, w1 * kd) + std::polar(1.0, w2 * kd);
  }
  return {std::move(s), sample_rate};
}

ComplexBasebandSignal generate_disambiguation(double f_d, double sample_rate,
                                              double amplitude) {
  if (!(sample_rate > 0.0)) throw std::invalid_argument("disambiguation: sample_rate must be > 0");
  if (!(f_d > 0.0) || f_d >= 0.5 * sample_rate) {
    throw std::invalid_argument("disambiguation: require 0 < f_d < sample_rate / 2");
  }
  if (!(amplitude > 0.0)) throw std::invalid_argument("disambiguation: amplitude must be > 0");
  const auto n = sample_count(sample_rate / f_d);
  std::vector<Complex> s(n);
  const double w = kTwoPi * f_d / sample_rate;
  for (std::size_t k = 0; k < n; ++k) s[k] = std::polar(amplitude, w * static_cast<double>(k));
  return {std::move(s), sample_rate};
}

namespace {

struct SpectrumMoments {
  double total = 0.0;
  double first = 0.0;   // sum f |S|^2
  double second = 0.0;  // sum f^2 |S|^2
};

SpectrumMoments spectrum_moments(const ComplexBasebandSignal& signal) {
  if (signal.empty()) throw std::invalid_argument("bandwidth: empty signal");
  const std::size_t n = signal.size();
  const auto spectrum = fft::forward(signal.samples(), n);
  SpectrumMoments m;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = std::norm(spectrum[k]);
    const double f = fft::bin_frequency(k, n, signal.sample_rate());
    m.total += p;
    m.first += f * p;
    m.second += f * f * p;
  }
  if (!(m.total > 0.0)) throw std::invalid_argument("bandwidth: zero-energy signal");
  return m;
}

}  // namespace

double spectral_centroid(const ComplexBasebandSignal& signal) {
  const auto m = spectrum_moments(signal);
  return m.first / m.total;
}

double mean_squared_bandwidth(const ComplexBasebandSignal& signal) {
  const auto m = spectrum_moments(signal);
  const double mean = m.first / m.total;
  const double var = std::max(0.0, m.second / m.total - mean * mean);
  return kTwoPi * kTwoPi * var;
}

double crlb_sigma_t(double beta_squared, double post_snr) {
  if (!(beta_squared > 0.0) || !(post_snr > 0.0)) {
    throw std::invalid_argument("crlb: bandwidth and SNR must be > 0");
  }
  return 1.0 / std::sqrt(beta_squared * post_snr);
}

double crlb_sigma_r(double delta_f, double post_snr) {
  if (!(delta_f > 0.0) || !(post_snr > 0.0)) {
    throw std::invalid_argument("crlb: delta_f and 2E/N0 must be > 0");
  }
  if (std::isinf(post_snr)) return 0.0;
  const double beta = kTwoPi * delta_f;
  return 0.5 * kSpeedOfLight * crlb_sigma_t(beta * beta, post_snr);
}

double post_processing_snr(double pulse_energy, double noise_variance) {
  if (!(pulse_energy > 0.0)) throw std::invalid_argument("snr: pulse energy must be > 0");
  if (noise_variance < 0.0) throw std::invalid_argument("snr: negative noise variance");
  if (noise_variance == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * pulse_energy / noise_variance;
}

double tone_separation_for_sigma(double target_sigma, double post_snr,
                                 double group_size) {
  if (!(target_sigma > 0.0) || !(post_snr > 0.0) || !(group_size >= 1.0)) {
    throw std::invalid_argument("tone_separation_for_sigma: invalid arguments");
  }
  // sigma_r(delta_f) / sqrt(group) = target, solved for 2 * delta_f.
  const double delta_f =
      0.5 * kSpeedOfLight / (kTwoPi * target_sigma * std::sqrt(group_size * post_snr));
  return 2.0 * delta_f;
}

}  // namespace cohsync
