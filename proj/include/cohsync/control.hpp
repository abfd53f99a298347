#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace cohsync {

/// Default PI gains (Hz/m, s): Ziegler-Nichols applied to the default ranging
/// plant at 22 dB per-sample SNR, x0 = 2 MHz, seed 1, where the ultimate gain
/// is 1.8e8 Hz/m with a 47.25 s period.
inline constexpr double kDefaultKu = 1.8e8;
inline constexpr double kDefaultTu = 47.25;
inline constexpr double kDefaultKp = 0.450 * kDefaultKu;
inline constexpr double kDefaultTi = 0.833 * kDefaultTu;

/// Velocity-form PI controller whose output x is the two-tone separation
/// 2 * delta_f (Hz) and whose error is sigma_measured - sigma_target (m).
///
/// k_p is expressed in controller units: the error is divided by error_unit
/// (m) before the gain, and the increment is multiplied by output_unit (Hz).
/// With both units at 1, k_p is in Hz/m.
struct PiControllerState {
  double k_p = kDefaultKp;
  double t_i = kDefaultTi;  // s; 0 disables integral action
  double x_prev = 3.48e6;   // Hz
  double e_prev = 0.0;      // m
  double x_min = 0.0;       // Hz
  double x_max = 7.5e6;     // Hz
  double error_unit = 1.0;  // m
  double output_unit = 1.0; // Hz

  bool integral_enabled() const noexcept { return t_i > 0.0; }
  void validate() const;
};

struct PiStepResult {
  PiControllerState state;
  double x = 0.0;          // Hz, clamped output
  bool saturated = false;  // the unclamped output fell outside [x_min, x_max]
};

/// x[n] = clamp(x[n-1] + k_p * ((1 + dt / t_i) * e[n] - e[n-1]), x_min, x_max)
///
/// The stored x_prev is the clamped value, so nothing accumulates while the
/// output is saturated. Throws std::invalid_argument for NaN error or dt <= 0.
PiStepResult pi_step(const PiControllerState& state, double e_n, double dt);

struct PiGains {
  double k_p = 0.0;
  double t_i = 0.0;
};

/// K_p = 0.450 K_u, T_i = 0.833 T_u.
PiGains ziegler_nichols_gains(double k_u, double t_u);

struct UltimateGain {
  double k_u = 0.0;
  double t_u = 0.0;  // s
};

/// Closed-loop response under proportional-only control at gain k_p: the
/// sampled output and the sample spacing.
struct PlantResponse {
  std::vector<double> output;
  double dt = 1.0;
};

using ClosedLoopPlant = std::function<PlantResponse(double k_p)>;

struct OscillationCriteria {
  double transient_fraction = 0.25;  // leading part of the response ignored
  int min_periods = 5;
  double decay_tolerance = 0.9;      // late / early cycle amplitude at or above this is sustained
  double min_peak_to_peak = 0.0;     // absolute floor on the late cycle amplitude
};

struct OscillationReport {
  bool sustained = false;
  int periods = 0;
  double period = 0.0;           // s
  double early_amplitude = 0.0;  // mean peak-to-peak, first half of the cycles
  double late_amplitude = 0.0;   // mean peak-to-peak, second half
};

OscillationReport detect_oscillation(std::span<const double> output, double dt,
                                     const OscillationCriteria& criteria = {});

/// Raises the proportional gain through `k_grid` (ascending) and returns the
/// first gain whose response oscillates with non-decaying amplitude over at
/// least min_periods cycles, together with the measured period. Empty when no
/// grid gain oscillates.
std::optional<UltimateGain> find_ultimate_gain(const ClosedLoopPlant& plant,
                                               std::span<const double> k_grid,
                                               const OscillationCriteria& criteria = {});

}  // namespace cohsync
