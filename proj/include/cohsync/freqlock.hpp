#pragma once

#include <cstdint>
#include <random>

#include "cohsync/channel.hpp"

namespace cohsync {

/// Two synchronization tones as seen at node B's receive antenna.
struct SelfMixInput {
  double f_s1 = 910e6;  // Hz
  double f_s2 = 920e6;  // Hz
  double phi1 = 0.0;    // rad
  double phi2 = 0.0;    // rad

  void validate() const;
};

struct SelfMixOutput {
  double f_ref = 0.0;  // Hz, demodulated difference tone
  double phi5 = 0.0;   // rad, in (-pi, pi]
};

/// Wraps an angle to (-pi, pi].
double wrap_phase(double phase) noexcept;

/// Carrier phase of a tone at frequency f after a one-way path of length d:
/// -2*pi*f*d/c.
double path_phase(double frequency, double distance) noexcept;

/// Product of the received two-tone signal with a path-matched copy of
/// itself, low-pass filtered: cos(2*pi*(f_s2 - f_s1)*t + phi2 - phi1).
SelfMixOutput self_mix(const SelfMixInput& input);

/// Node B's local oscillator relative to node A.
struct OscillatorState {
  bool locked = false;
  double drift_rate = 0.0;  // Hz/s while unlocked
  double offset = 0.0;      // Hz, at the reference frequency

  void validate() const;
};

enum class DriftModel { kLinear, kRandomWalk };

struct DriftOptions {
  DriftModel model = DriftModel::kLinear;
  double random_walk_sigma = 0.0;  // Hz / sqrt(s), random-walk model only
};

/// Advances node B's oscillator by dt. With a reference present the PLL is
/// taken as locked immediately (offset 0); otherwise the offset integrates
/// drift_rate * dt.
OscillatorState lock_state_update(OscillatorState state, bool ref_available, double dt);

/// Same, with the random-walk drift model adding N(0, sigma^2 dt) per step.
OscillatorState lock_state_update(OscillatorState state, bool ref_available, double dt,
                                  const DriftOptions& drift, std::mt19937_64& engine);

/// Carrier plan whose offsets follow node B's oscillator: an LO synthesized
/// from a reference at `reference_hz` scales the offset by f_c / reference_hz.
CarrierPlan carrier_plan_for(const OscillatorState& node_b, double f_c1, double f_c2,
                             double reference_hz = 10e6);

}  // namespace cohsync
