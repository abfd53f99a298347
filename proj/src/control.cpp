#include "cohsync/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cohsync {

void PiControllerState::validate() const {
  if (!std::isfinite(k_p) || !std::isfinite(t_i) || t_i < 0.0) {
    throw std::invalid_argument("pi: k_p must be finite and t_i >= 0");
  }
  if (!(x_min <= x_max)) throw std::invalid_argument("pi: x_min must not exceed x_max");
  if (!(x_prev >= x_min && x_prev <= x_max)) {
    throw std::invalid_argument("pi: x_prev outside [x_min, x_max]");
  }
  if (!std::isfinite(e_prev)) throw std::invalid_argument("pi: e_prev must be finite");
  if (!(error_unit > 0.0) || !(output_unit > 0.0)) {
    throw std::invalid_argument("pi: unit scales must be > 0");
  }
}

PiStepResult pi_step(const PiControllerState& state, double e_n, double dt) {
  if (std::isnan(e_n)) throw std::invalid_argument("pi: error input is NaN");
  if (!std::isfinite(e_n)) throw std::invalid_argument("pi: error input is not finite");
  if (!(dt > 0.0)) throw std::invalid_argument("pi: dt must be > 0");
  state.validate();

  const double integral = state.integral_enabled() ? dt / state.t_i : 0.0;
  const double e_now = e_n / state.error_unit;
  const double e_before = state.e_prev / state.error_unit;
  const double increment = state.k_p * ((1.0 + integral) * e_now - e_before) * state.output_unit;
  const double raw = state.x_prev + increment;

  PiStepResult r;
  r.x = std::clamp(raw, state.x_min, state.x_max);
  r.saturated = raw < state.x_min || raw > state.x_max;
  r.state = state;
  r.state.x_prev = r.x;
  r.state.e_prev = e_n;
  return r;
}

PiGains ziegler_nichols_gains(double k_u, double t_u) {
  if (!(k_u > 0.0) || !(t_u > 0.0)) {
    throw std::invalid_argument("ziegler_nichols: k_u and t_u must be > 0");
  }
  return {0.450 * k_u, 0.833 * t_u};
}

OscillationReport detect_oscillation(std::span<const double> output, double dt,
                                     const OscillationCriteria& criteria) {
  OscillationReport report;
  const auto skip = static_cast<std::size_t>(
      std::floor(criteria.transient_fraction * static_cast<double>(output.size())));
  if (output.size() < skip + 3) return report;
  const auto y = output.subspan(skip);

  // Local maxima, with flat runs collapsed to their first sample.
  std::vector<std::size_t> peaks;
  int prev_sign = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double d = y[i] - y[i - 1];
    const int sign = (d > 0.0) - (d < 0.0);
    if (sign == 0) continue;
    if (prev_sign > 0 && sign < 0) {
      std::size_t j = i - 1;
      while (j > 0 && y[j - 1] == y[j]) --j;
      peaks.push_back(j);
    }
    prev_sign = sign;
  }
  if (peaks.size() < 2) return report;

  std::vector<double> amplitudes;
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    const auto [lo, hi] = std::minmax_element(y.begin() + static_cast<long>(peaks[k]),
                                              y.begin() + static_cast<long>(peaks[k + 1]) + 1);
    amplitudes.push_back(*hi - *lo);
  }
  report.periods = static_cast<int>(amplitudes.size());
  report.period = static_cast<double>(peaks.back() - peaks.front()) /
                  static_cast<double>(peaks.size() - 1) * dt;
  const std::size_t half = amplitudes.size() / 2;
  if (half == 0) return report;
  report.early_amplitude =
      std::accumulate(amplitudes.begin(), amplitudes.begin() + static_cast<long>(half), 0.0) /
      static_cast<double>(half);
  report.late_amplitude =
      std::accumulate(amplitudes.end() - static_cast<long>(half), amplitudes.end(), 0.0) /
      static_cast<double>(half);

  // Ripple at rounding level on a settled output is not an oscillation.
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  report.sustained = report.periods >= criteria.min_periods &&
                     report.late_amplitude > 1e-9 * scale &&
                     report.late_amplitude >= criteria.min_peak_to_peak &&
                     report.late_amplitude >= criteria.decay_tolerance * report.early_amplitude;
  return report;
}

std::optional<UltimateGain> find_ultimate_gain(const ClosedLoopPlant& plant,
                                               std::span<const double> k_grid,
                                               const OscillationCriteria& criteria) {
  if (!plant) throw std::invalid_argument("find_ultimate_gain: no plant");
  std::vector<double> grid(k_grid.begin(), k_grid.end());
  std::sort(grid.begin(), grid.end());
  for (double k : grid) {
    if (!(k >= 0.0)) throw std::invalid_argument("find_ultimate_gain: gains must be >= 0");
    const PlantResponse response = plant(k);
    if (!(response.dt > 0.0)) throw std::invalid_argument("find_ultimate_gain: plant dt must be > 0");
    const auto report = detect_oscillation(response.output, response.dt, criteria);
    if (report.sustained) return UltimateGain{k, report.period};
  }
  return std::nullopt;
}

}  // namespace cohsync
