#include "cohsync/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "cohsync/constants.hpp"
#include "cohsync/fft.hpp"

namespace cohsync {

void CarrierPlan::validate() const {
  if (!(f_c1 > 0.0) || !(f_c2 > 0.0)) throw std::invalid_argument("carrier: carriers must be > 0");
  if (!std::isfinite(offset1) || !std::isfinite(offset2)) {
    throw std::invalid_argument("carrier: offsets must be finite");
  }
}

void ChannelState::validate() const {
  if (!(true_range >= 0.0) || !std::isfinite(true_range)) {
    throw std::invalid_argument("channel: true_range must be finite and >= 0");
  }
  if (!(repeater_gain > 0.0)) throw std::invalid_argument("channel: repeater_gain must be > 0");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("channel: snr_db must be a number above -inf");
  }
  carrier.validate();
}

double round_trip_delay(double range) noexcept { return 2.0 * range / kSpeedOfLight; }

double residual_baseband_frequency(double f_b, const CarrierPlan& carrier) noexcept {
  return f_b - carrier.offset1 + carrier.offset2;
}

double noise_variance_for(double reference_power, double snr_db) {
  if (!(reference_power > 0.0)) throw std::invalid_argument("noise: reference power must be > 0");
  if (std::isnan(snr_db)) throw std::invalid_argument("noise: snr_db is NaN");
  if (snr_db == std::numeric_limits<double>::infinity()) return 0.0;
  return reference_power / std::pow(10.0, snr_db / 10.0);
}

ComplexBasebandSignal fractional_delay(const ComplexBasebandSignal& pulse, double delay,
                                       std::size_t out_len) {
  if (pulse.empty()) throw std::invalid_argument("delay: empty pulse");
  if (!(delay >= 0.0)) throw std::invalid_argument("delay: negative delay");
  const double fs = pulse.sample_rate();
  const double delay_samples = delay * fs;
  if (delay_samples + static_cast<double>(pulse.size()) > static_cast<double>(out_len)) {
    throw std::invalid_argument("delay: delayed pulse exceeds the receive window");
  }
  if (delay == 0.0) {
    std::vector<Complex> out(pulse.samples().begin(), pulse.samples().end());
    out.resize(out_len);
    return {std::move(out), fs};
  }
  const std::size_t n = fft::next_pow2(2 * out_len);
  auto spectrum = fft::forward(pulse.samples(), n);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency(k, n, fs);
    spectrum[k] *= std::polar(1.0, -kTwoPi * f * delay);
  }
  auto shifted = fft::inverse(spectrum, n);
  shifted.resize(out_len);
  return {std::move(shifted), fs};
}

void add_awgn(ComplexBasebandSignal& signal, double noise_variance, std::uint64_t seed) {
  if (noise_variance < 0.0 || std::isnan(noise_variance)) {
    throw std::invalid_argument("awgn: variance must be >= 0");
  }
  if (noise_variance == 0.0) return;
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * noise_variance));
  for (auto& v : signal.samples()) {
    const double re = normal(engine);
    const double im = normal(engine);
    v += Complex(re, im);
  }
}

ComplexBasebandSignal propagate_round_trip(const ComplexBasebandSignal& pulse,
                                           const ChannelState& state, std::uint64_t seed,
                                           const LinkOptions& options) {
  state.validate();
  if (pulse.empty()) throw std::invalid_argument("channel: empty pulse");
  const std::size_t window = options.window_samples == 0 ? pulse.size() : options.window_samples;
  auto rx = fractional_delay(pulse, round_trip_delay(state.true_range), window);

  const double shift = residual_baseband_frequency(0.0, state.carrier);
  const double fs = pulse.sample_rate();
  auto& s = rx.samples();
  if (shift != 0.0) {
    const double w = kTwoPi * shift / fs;
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= std::polar(1.0, w * static_cast<double>(k));
  }
  if (state.repeater_gain != 1.0) {
    for (auto& v : s) v *= state.repeater_gain;
  }

  const double ref_power =
      options.noise_reference_power > 0.0 ? options.noise_reference_power : pulse.mean_power();
  const double variance =
      noise_variance_for(ref_power * state.repeater_gain * state.repeater_gain, state.snr_db);
  add_awgn(rx, variance, seed);
  return rx;
}

}  // namespace cohsync
