#include "cohsync/freqlock.hpp"

#include <cmath>
#include <stdexcept>

#include "cohsync/constants.hpp"

namespace cohsync {

void SelfMixInput::validate() const {
  if (!(f_s1 > 0.0) || !(f_s2 > f_s1)) {
    throw std::invalid_argument("self_mix: require f_s2 > f_s1 > 0");
  }
  if (!std::isfinite(phi1) || !std::isfinite(phi2)) {
    throw std::invalid_argument("self_mix: phases must be finite");
  }
}

double wrap_phase(double phase) noexcept {
  double r = std::remainder(phase, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

double path_phase(double frequency, double distance) noexcept {
  return -kTwoPi * frequency * distance / kSpeedOfLight;
}

SelfMixOutput self_mix(const SelfMixInput& input) {
  input.validate();
  return {input.f_s2 - input.f_s1, wrap_phase(input.phi2 - input.phi1)};
}

void OscillatorState::validate() const {
  if (!std::isfinite(drift_rate) || !std::isfinite(offset)) {
    throw std::invalid_argument("oscillator: drift and offset must be finite");
  }
}

OscillatorState lock_state_update(OscillatorState state, bool ref_available, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("lock_state_update: dt must be > 0");
  state.validate();
  if (ref_available) {
    state.locked = true;
    state.offset = 0.0;
    return state;
  }
  state.locked = false;
  state.offset += state.drift_rate * dt;
  return state;
}

OscillatorState lock_state_update(OscillatorState state, bool ref_available, double dt,
                                  const DriftOptions& drift, std::mt19937_64& engine) {
  state = lock_state_update(state, ref_available, dt);
  if (!state.locked && drift.model == DriftModel::kRandomWalk && drift.random_walk_sigma > 0.0) {
    std::normal_distribution<double> step(0.0, drift.random_walk_sigma * std::sqrt(dt));
    state.offset += step(engine);
  }
  return state;
}

CarrierPlan carrier_plan_for(const OscillatorState& node_b, double f_c1, double f_c2,
                             double reference_hz) {
  if (!(reference_hz > 0.0)) throw std::invalid_argument("carrier_plan_for: reference must be > 0");
  CarrierPlan plan;
  plan.f_c1 = f_c1;
  plan.f_c2 = f_c2;
  if (!node_b.locked) {
    plan.offset1 = node_b.offset * f_c1 / reference_hz;
    plan.offset2 = node_b.offset * f_c2 / reference_hz;
  }
  plan.validate();
  return plan;
}

}  // namespace cohsync
