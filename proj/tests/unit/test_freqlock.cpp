#include <cmath>
#include <stdexcept>
#include <numbers>
#include <random>

#include "cohsync/channel.hpp"
#include "cohsync/constants.hpp"
#include "cohsync/freqlock.hpp"
#include "doctest.h"

using namespace cohsync;

TEST_CASE("self-mix difference tone") {
  const auto out = self_mix({910e6, 920e6, 0.0, 0.0});
  CHECK(out.f_ref == 10e6);
  CHECK(out.phi5 == 0.0);

  const auto doubled = self_mix({1820e6, 1830e6, 0.0, 0.0});
  CHECK(doubled.f_ref == 10e6);
}

TEST_CASE("path-derived phi5") {
  const double d = 90.0;
  const double phi1 = -2.0 * std::numbers::pi * 910e6 * d / kSpeedOfLight;
  const double phi2 = -2.0 * std::numbers::pi * 920e6 * d / kSpeedOfLight;
  CHECK(path_phase(910e6, d) == doctest::Approx(phi1).epsilon(1e-14));
  const auto out = self_mix({910e6, 920e6, phi1, phi2});
  const double raw = -2.0 * std::numbers::pi * 10e6 * d / kSpeedOfLight;
  const double expected = std::remainder(raw, 2.0 * std::numbers::pi);
  CHECK(std::abs(out.phi5 - expected) < 1e-9);
}

TEST_CASE("phi5 ignores a common phase") {
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double p1 = u(eng), p2 = u(eng), c = u(eng);
    const auto a = self_mix({910e6, 920e6, p1, p2});
    const auto b = self_mix({910e6, 920e6, p1 + c, p2 + c});
    CHECK(std::abs(wrap_phase(a.phi5 - b.phi5)) < 1e-9);
    CHECK(a.phi5 > -std::numbers::pi);
    CHECK(a.phi5 <= std::numbers::pi);
  }
}

TEST_CASE("wrap_phase") {
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_phase(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_phase(3.0 * std::numbers::pi / 2.0) == doctest::Approx(-std::numbers::pi / 2.0));
}

TEST_CASE("self-mix rejects bad tone plans") {
  CHECK_THROWS_AS(self_mix({920e6, 910e6, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(self_mix({0.0, 910e6, 0, 0}), std::invalid_argument);
}

TEST_CASE("lock updates") {
  OscillatorState s;
  s.locked = true;
  s = lock_state_update(s, true, 1.0);
  CHECK(s.locked);
  CHECK(s.offset == 0.0);

  s.drift_rate = 1.0;
  s = lock_state_update(s, false, 10.0);
  CHECK_FALSE(s.locked);
  CHECK(s.offset == doctest::Approx(10.0));

  // off for 5 s in 1 s steps, then back on
  OscillatorState t;
  t.locked = true;
  t.drift_rate = 2.0;
  const double expected[] = {2.0, 4.0, 6.0, 8.0, 10.0};
  for (double e : expected) {
    t = lock_state_update(t, false, 1.0);
    CHECK(t.offset == doctest::Approx(e));
  }
  t = lock_state_update(t, true, 1.0);
  CHECK(t.locked);
  CHECK(t.offset == 0.0);

  CHECK_THROWS_AS(lock_state_update(t, true, 0.0), std::invalid_argument);
}

TEST_CASE("random-walk drift") {
  DriftOptions drift{DriftModel::kRandomWalk, 3.0};
  std::mt19937_64 eng(9);
  double sum = 0.0, sum2 = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    OscillatorState s;
    s = lock_state_update(s, false, 4.0, drift, eng);
    sum += s.offset;
    sum2 += s.offset * s.offset;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(9.0 * 4.0).epsilon(0.05));

  OscillatorState locked;
  CHECK(lock_state_update(locked, true, 4.0, drift, eng).offset == 0.0);
}

TEST_CASE("carrier plan follows node B") {
  OscillatorState s;
  s.offset = 2.0;
  const auto plan = carrier_plan_for(s, 910e6, 920e6, 10e6);
  CHECK(plan.offset1 == doctest::Approx(182.0));
  CHECK(plan.offset2 == doctest::Approx(184.0));

  s = lock_state_update(s, true, 1.0);
  const auto locked = carrier_plan_for(s, 910e6, 920e6);
  CHECK(residual_baseband_frequency(20e3, locked) == 20e3);
}
