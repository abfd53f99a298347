#include <cmath>
#include <stdexcept>
#include <vector>

#include "cohsync/control.hpp"
#include "doctest.h"

using namespace cohsync;

namespace {

PiControllerState unit_state(double k_p, double t_i, double x0) {
  PiControllerState s;
  s.k_p = k_p;
  s.t_i = t_i;
  s.x_prev = x0;
  s.e_prev = 0.0;
  return s;
}

}  // namespace

TEST_CASE("zero error holds the output") {
  for (double t_i : {0.0, 3.3, 40.0}) {
    for (double dt : {0.5, 21.0}) {
      auto s = unit_state(7.2e7, t_i, 3.48e6);
      const auto r = pi_step(s, 0.0, dt);
      CHECK(r.x == 3.48e6);
      CHECK_FALSE(r.saturated);
    }
  }
}

TEST_CASE("hand-evaluated step with the small deployed gains") {
  auto s = unit_state(1e-5, 3.3, 3.5e6);
  const auto r = pi_step(s, 0.005, 21.0);
  CHECK(r.x == doctest::Approx(3.5e6 + 1e-5 * (1.0 + 21.0 / 3.3) * 0.005).epsilon(1e-15));
  CHECK(r.x > 3.5e6);
  CHECK(r.state.e_prev == 0.005);
  CHECK(r.state.x_prev == r.x);

  // millimetre error and MHz output units
  s.error_unit = 1e-3;
  s.output_unit = 1e6;
  const auto scaled = pi_step(s, 0.005, 21.0);
  CHECK(scaled.x == doctest::Approx(3.5e6 + 1e-5 * (1.0 + 21.0 / 3.3) * 5.0 * 1e6));
}

TEST_CASE("sustained positive error ramps to the clamp") {
  auto s = unit_state(kDefaultKp, kDefaultTi, 3.5e6);
  double last = s.x_prev;
  bool hit = false;
  for (int n = 0; n < 100; ++n) {
    const auto r = pi_step(s, 0.002, 21.0);
    CHECK(r.x >= last);
    CHECK(r.x <= 7.5e6);
    if (r.saturated) hit = true;
    last = r.x;
    s = r.state;
  }
  CHECK(hit);
  CHECK(last == 7.5e6);

  auto low = unit_state(kDefaultKp, kDefaultTi, 1e5);
  for (int n = 0; n < 100; ++n) low = pi_step(low, -0.01, 21.0).state;
  CHECK(low.x_prev == 0.0);
}

TEST_CASE("velocity form matches the positional law") {
  const std::vector<double> e{0.004, 0.0031, -0.0012, 0.0007, 0.0, -0.0025, 0.0019, 0.0011};
  const double k_p = 3.0e7, t_i = 30.0, dt = 21.0, x0 = 3.0e6;
  auto s = unit_state(k_p, t_i, x0);
  s.x_min = -1e12;
  s.x_max = 1e12;
  double integral = 0.0;
  for (std::size_t n = 0; n < e.size(); ++n) {
    s = pi_step(s, e[n], dt).state;
    integral += e[n];
    const double positional = x0 + k_p * (e[n] + dt / t_i * integral);
    CHECK(s.x_prev == doctest::Approx(positional).epsilon(1e-9));
  }
}

TEST_CASE("step direction") {
  const double dt = 21.0, t_i = 35.0;
  for (double en : {-0.003, -0.001, 0.0, 0.0005, 0.004}) {
    for (double ep : {-0.002, 0.0, 0.003}) {
      auto s = unit_state(5e6, t_i, 3.5e6);
      s.e_prev = ep;
      const auto r = pi_step(s, en, dt);
      const double drive = (1.0 + dt / t_i) * en - ep;
      const double move = r.x - 3.5e6;
      CHECK((drive > 0) == (move > 0));
      CHECK((drive < 0) == (move < 0));
    }
  }
}

TEST_CASE("controller input errors") {
  const auto s = unit_state(1.0, 1.0, 1e6);
  CHECK_THROWS_AS(pi_step(s, std::nan(""), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(pi_step(s, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pi_step(s, 0.0, -1.0), std::invalid_argument);
  auto bad = s;
  bad.x_prev = 8e6;
  CHECK_THROWS(pi_step(bad, 0.0, 1.0));
}

TEST_CASE("Ziegler-Nichols gains") {
  const auto g = ziegler_nichols_gains(1.0, 1.0);
  CHECK(g.k_p == doctest::Approx(0.450));
  CHECK(g.t_i == doctest::Approx(0.833));
  const auto deployed = ziegler_nichols_gains(2.22e-5, 3.96);
  CHECK(deployed.k_p == doctest::Approx(9.99e-6).epsilon(1e-3));
  CHECK(deployed.t_i == doctest::Approx(3.30).epsilon(1e-3));
  const auto ten = ziegler_nichols_gains(22.2e-5, 3.96);
  CHECK(ten.k_p == doctest::Approx(10.0 * deployed.k_p));
  CHECK(ten.t_i == deployed.t_i);
  CHECK(kDefaultKp == doctest::Approx(8.1e7));
  CHECK_THROWS_AS(ziegler_nichols_gains(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ziegler_nichols_gains(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("ultimate gain of a first-order lag") {
  // y[n+1] = a y[n] + (1 - a) u[n] under u = K (1 - y). The closed-loop pole
  // a - K (1 - a) reaches -1 at K = (1 + a) / (1 - a).
  for (double a : {0.5, 0.8}) {
    const double k_analytic = (1.0 + a) / (1.0 - a);
    const ClosedLoopPlant plant = [a](double k) {
      PlantResponse r;
      r.dt = 0.1;
      double y = 0.0;
      for (int n = 0; n < 200; ++n) {
        r.output.push_back(y);
        y = a * y + (1.0 - a) * k * (1.0 - y);
      }
      return r;
    };
    std::vector<double> grid;
    const double step = k_analytic / 23.0;
    for (int i = 1; i <= 40; ++i) grid.push_back(step * (i + 0.37));
    const auto found = find_ultimate_gain(plant, grid);
    REQUIRE(found.has_value());
    CHECK(found->k_u >= k_analytic);
    CHECK(found->k_u - k_analytic <= step);
    CHECK(found->t_u == doctest::Approx(0.2).epsilon(1e-9));
  }
}

TEST_CASE("integrator under proportional control never oscillates") {
  // y' = K (1 - y), sampled exactly.
  const ClosedLoopPlant plant = [](double k) {
    PlantResponse r;
    r.dt = 0.05;
    for (int n = 0; n < 400; ++n) r.output.push_back(1.0 - std::exp(-k * r.dt * n));
    return r;
  };
  std::vector<double> grid;
  for (int i = 1; i <= 30; ++i) grid.push_back(0.5 * i);
  CHECK_FALSE(find_ultimate_gain(plant, grid).has_value());
}

TEST_CASE("oscillation detector") {
  std::vector<double> sine, decaying;
  for (int n = 0; n < 400; ++n) {
    sine.push_back(std::sin(2.0 * 3.14159265358979 * n / 20.0));
    decaying.push_back(std::exp(-0.02 * n) * std::sin(2.0 * 3.14159265358979 * n / 20.0));
  }
  const auto s = detect_oscillation(sine, 0.5);
  CHECK(s.sustained);
  CHECK(s.period == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(s.periods >= 5);
  CHECK_FALSE(detect_oscillation(decaying, 0.5).sustained);

  OscillationCriteria floor;
  floor.min_peak_to_peak = 3.0;
  CHECK_FALSE(detect_oscillation(sine, 0.5, floor).sustained);

  const std::vector<double> flat(100, 2.0);
  CHECK_FALSE(detect_oscillation(flat, 1.0).sustained);
}
