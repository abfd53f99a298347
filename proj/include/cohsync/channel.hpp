#pragma once

#include <cstddef>
#include <cstdint>

#include "cohsync/signal.hpp"

namespace cohsync {

/// Outbound (A -> B) and return (B -> A) carriers, with node B's local
/// oscillator offsets relative to node A. Offsets are zero when locked.
struct CarrierPlan {
  double f_c1 = 2.45e9;  // Hz
  double f_c2 = 5.8e9;   // Hz
  double offset1 = 0.0;  // f_c1' - f_c1, Hz
  double offset2 = 0.0;  // f_c2' - f_c2, Hz

  void validate() const;
};

/// Cooperative round-trip link seen from node A's receiver.
struct ChannelState {
  double true_range = 90.0;  // m
  double snr_db = 20.0;      // per-sample SNR at node A; +inf disables noise
  CarrierPlan carrier;
  double repeater_gain = 1.0;  // amplitude

  void validate() const;
};

struct LinkOptions {
  /// Receive window length in samples; 0 means the pulse length.
  std::size_t window_samples = 0;
  /// Signal power the SNR refers to; 0 means the mean power of the pulse.
  double noise_reference_power = 0.0;
};

/// Two-way propagation delay for a one-way range, seconds.
double round_trip_delay(double range) noexcept;

/// Baseband frequency after down-conversion at B with f_c1', re-transmission
/// on f_c2' and down-conversion at A with f_c2:
///   f_b + f_c1 - f_c1' + f_c2' - f_c2 = f_b - offset1 + offset2.
double residual_baseband_frequency(double f_b, const CarrierPlan& carrier) noexcept;

/// Complex noise variance giving `snr_db` against `reference_power`.
/// Returns 0 for snr_db = +inf.
double noise_variance_for(double reference_power, double snr_db);

/// Delays `pulse` by `delay` seconds into a window of `out_len` samples using
/// a linear phase ramp across the DFT of the zero-padded pulse.
ComplexBasebandSignal fractional_delay(const ComplexBasebandSignal& pulse, double delay,
                                       std::size_t out_len);

/// Adds circularly-symmetric white Gaussian noise of total variance
/// `noise_variance` per complex sample, drawn from a generator seeded by
/// `seed`.
void add_awgn(ComplexBasebandSignal& signal, double noise_variance, std::uint64_t seed);

/// Pulse as received at node A after the repeater: delayed by
/// 2 * true_range / c, shifted by the residual carrier frequency, scaled by
/// the repeater gain, plus noise at the requested per-sample SNR. Identical
/// seeds give bit-identical outputs.
///
/// Throws std::invalid_argument when the delayed pulse does not fit in the
/// receive window.
ComplexBasebandSignal propagate_round_trip(const ComplexBasebandSignal& pulse,
                                           const ChannelState& state, std::uint64_t seed,
                                           const LinkOptions& options = {});

}  // namespace cohsync
