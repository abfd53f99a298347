#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cohsync {

using Complex = std::complex<double>;

/// Uniformly sampled complex baseband waveform.
class ComplexBasebandSignal {
 public:
  ComplexBasebandSignal() = default;
  ComplexBasebandSignal(std::vector<Complex> samples, double sample_rate);

  std::span<const Complex> samples() const noexcept { return samples_; }
  std::vector<Complex>& samples() noexcept { return samples_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  /// Sum of |s[k]|^2.
  double energy() const noexcept;
  /// energy() / size(); zero for an empty signal.
  double mean_power() const noexcept;
  /// size() / sample_rate(), seconds.
  double duration() const noexcept;

 private:
  std::vector<Complex> samples_;
  double sample_rate_ = 1.0;
};

/// Two complex tones at f1 <= f2 (Hz). The half-separation delta_f sets the
/// mean-squared bandwidth of the pulse.
struct TwoToneSpec {
  double f1 = 20e3;
  double f2 = 7.52e6;

  double separation() const noexcept { return f2 - f1; }
  double delta_f() const noexcept { return 0.5 * (f2 - f1); }
  /// Throws std::invalid_argument unless 0 <= f1 <= f2 < sample_rate / 2.
  void validate(double sample_rate) const;
};

struct WaveformConfig {
  TwoToneSpec two_tone;
  double f_d = 1.875e6;                   // disambiguation tone, Hz
  double ranging_pulse_width = 143.7e-6;  // s
  double disamb_pulse_width = 1.0 / 1.875e6;
  double pri = 159.7e-6;                  // s
  double sample_rate = 25e6;              // Hz
  // Peak amplitude of the disambiguation tone; each ranging tone has unit
  // amplitude.
  double disamb_amplitude = 4.0;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// Disambiguation tone matching a tone separation: f_d = delta_f / 2.
double disambiguation_frequency_for(const TwoToneSpec& spec) noexcept;

/// Sum of two unit-amplitude complex tones at +f1 and +f2, both with zero phase
/// at the first sample; length round(width * sample_rate), ties to even.
ComplexBasebandSignal generate_two_tone(const TwoToneSpec& spec, double width,
                                        double sample_rate);

/// Exactly one period of a complex tone at f_d: round(sample_rate / f_d)
/// samples, ties to even.
ComplexBasebandSignal generate_disambiguation(double f_d, double sample_rate,
                                              double amplitude = 1.0);

/// Discrete mean-squared bandwidth (rad/s)^2 measured about the spectral
/// centroid, from the n-point DFT of the signal.
double mean_squared_bandwidth(const ComplexBasebandSignal& signal);

/// Power-weighted mean frequency of the n-point DFT, Hz.
double spectral_centroid(const ComplexBasebandSignal& signal);

/// One-way ranging standard deviation bound (m) for a two-tone waveform with
/// half-separation delta_f (Hz) at post-processing SNR 2E/N0 (linear):
///
///   sigma_t = 1 / (beta * sqrt(2E/N0)),  beta = 2*pi*delta_f
///   sigma_r = (c / 2) * sigma_t
///
/// The closed form c / (8 (pi delta_f)^2 sqrt(2E/N0)) does not reduce to
/// this expression and is not used.
double crlb_sigma_r(double delta_f, double post_snr);

/// Time-delay bound sigma_t (s) for a given mean-squared bandwidth.
double crlb_sigma_t(double beta_squared, double post_snr);

/// 2E/N0 for a pulse of energy E in complex white noise of per-sample
/// variance noise_variance.
double post_processing_snr(double pulse_energy, double noise_variance);

/// Smallest tone separation 2*delta_f (Hz) whose bound, after averaging
/// groups of `group_size` estimates, does not exceed `target_sigma`.
double tone_separation_for_sigma(double target_sigma, double post_snr,
                                 double group_size = 5.0);

}  // namespace cohsync
