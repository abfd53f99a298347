#include "cohsync/coherence.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>

#include "cohsync/rng.hpp"

namespace cohsync {

double coherent_gain(std::span<const double> phase_errors, std::span<const double> amplitudes) {
  if (phase_errors.size() != amplitudes.size()) {
    throw std::invalid_argument("coherent_gain: phase and amplitude lengths differ");
  }
  std::complex<double> sum{0.0, 0.0};
  double ideal = 0.0;
  for (std::size_t n = 0; n < phase_errors.size(); ++n) {
    if (!(amplitudes[n] >= 0.0)) throw std::invalid_argument("coherent_gain: negative amplitude");
    sum += std::polar(amplitudes[n], phase_errors[n]);
    ideal += amplitudes[n];
  }
  if (!(ideal > 0.0)) throw std::invalid_argument("coherent_gain: all amplitudes are zero");
  return std::norm(sum) / (ideal * ideal);
}

double coherent_gain(std::span<const double> phase_errors) {
  const std::vector<double> ones(phase_errors.size(), 1.0);
  return coherent_gain(phase_errors, ones);
}

namespace {

void check_interval(const Interval& r, const char* name, bool positive) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi || (positive && !(r.lo > 0.0))) {
    throw std::invalid_argument(std::string("array scenario: bad ") + name);
  }
}

double draw(const Interval& r, std::mt19937_64& eng) {
  return r.lo + (r.hi - r.lo) * std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

}  // namespace

void ArrayScenario::validate() const {
  if (n_nodes < 2) throw std::invalid_argument("array scenario: n_nodes must be >= 2");
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw std::invalid_argument("array scenario: wavelength must be > 0");
  }
  if (!(sigma_d >= 0.0) || !std::isfinite(sigma_d)) {
    throw std::invalid_argument("array scenario: sigma_d must be >= 0");
  }
  check_interval(theta_range, "theta_range", false);
  check_interval(node_spacing_range, "node_spacing_range", true);
  check_interval(sync_distance_range, "sync_distance_range", true);
  if (fixed_theta && !std::isfinite(*fixed_theta)) {
    throw std::invalid_argument("array scenario: fixed_theta must be finite");
  }
  if (!std::isfinite(calib_error) || !(sync_phase_sigma >= 0.0)) {
    throw std::invalid_argument("array scenario: bad calib_error or sync_phase_sigma");
  }
}

GainSample sample_gain(const ArrayScenario& s, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double k = kTwoPi / s.wavelength;
  const double theta = s.fixed_theta ? *s.fixed_theta : draw(s.theta_range, eng);
  const double sin_theta = std::sin(theta);

  const auto n = static_cast<std::size_t>(s.n_nodes);
  std::vector<double> eps(n, 0.0);
  std::vector<double> amp(n, 1.0);
  double position = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // Fixed draw order per node keeps streams aligned across scenarios.
    if (i > 0) position += draw(s.node_spacing_range, eng) * s.wavelength;
    const double sync_distance = draw(s.sync_distance_range, eng) * s.wavelength;
    const double z_range = normal(eng);
    const double z_phase = normal(eng);
    const double u_amp = unit(eng);

    if (s.channel == ChannelMagnitude::kRayleigh) amp[i] = std::sqrt(-std::log1p(-u_amp));
    if (i == 0 && s.reference_node_exact) continue;

    const double delta = s.sigma_d * z_range;
    // Compensation applied with the estimated distance minus the true path.
    double e = k * (position + delta) * sin_theta - k * position * sin_theta;
    switch (s.sync_phase) {
      case SyncPhaseModel::kNone:
        break;
      case SyncPhaseModel::kRangingCoupled:
        e += k * (sync_distance + delta) - k * sync_distance;
        break;
      case SyncPhaseModel::kGaussian:
        e += s.sync_phase_sigma * z_phase;
        break;
    }
    if (i > 0) e += s.calib_error;
    eps[i] = e;
  }
  return {coherent_gain(eps, amp)};
}

ProbabilityCurve probability_curve(const ArrayScenario& base, std::span<const double> sigma_grid,
                                   double threshold, std::size_t trials, std::uint64_t seed) {
  if (sigma_grid.empty()) throw std::invalid_argument("probability_curve: empty sigma grid");
  if (trials == 0) throw std::invalid_argument("probability_curve: trials must be > 0");
  if (!std::isfinite(threshold)) throw std::invalid_argument("probability_curve: bad threshold");
  base.validate();

  ProbabilityCurve curve;
  curve.threshold = threshold;
  curve.trials = trials;
  for (double sigma : sigma_grid) {
    ArrayScenario s = base;
    s.sigma_d = sigma;
    s.validate();
    std::size_t hits = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      if (sample_gain(s, derive_seed(seed, {t})).g_c >= threshold) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    curve.sigma_d.push_back(sigma);
    curve.probability.push_back(p);
    curve.std_error.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(trials)));
  }
  return curve;
}

bool is_monotone_within_bands(const ProbabilityCurve& curve, double bands) {
  const std::size_t n = curve.probability.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (curve.sigma_d[j] < curve.sigma_d[i]) continue;
      const double band = bands * std::hypot(curve.std_error[i], curve.std_error[j]);
      if (curve.probability[j] > curve.probability[i] + band) return false;
    }
  }
  return true;
}

std::optional<double> threshold_sigma(const ProbabilityCurve& curve, double probability) {
  const auto& p = curve.probability;
  const auto& s = curve.sigma_d;
  if (p.empty()) return std::nullopt;
  if (p[0] <= probability) return p[0] == probability ? std::optional<double>(s[0]) : std::nullopt;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] <= probability) {
      const double t = (p[i - 1] - probability) / (p[i - 1] - p[i]);
      return s[i - 1] + t * (s[i] - s[i - 1]);
    }
  }
  return std::nullopt;
}

ThresholdTable default_threshold_table() {
  return {{0.9, 0.0495}, {0.8, 0.0725}, {0.7, 0.1040}};
}

ThresholdTable threshold_table_from_curve(const ProbabilityCurve& curve, double wavelength,
                                          std::span<const double> probabilities) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("threshold table: wavelength must be > 0");
  ThresholdTable table;
  for (double p : probabilities) {
    const auto sigma = threshold_sigma(curve, p);
    if (!sigma) {
      throw std::invalid_argument("threshold table: curve never reaches P = " + std::to_string(p));
    }
    table[p] = *sigma / wavelength;
  }
  return table;
}

double max_coherent_frequency(double sigma_d, double probability, const ThresholdTable& table) {
  if (!(sigma_d > 0.0)) throw std::invalid_argument("max_coherent_frequency: sigma_d must be > 0");
  for (const auto& [p, k] : table) {
    if (std::abs(p - probability) <= 1e-9) return k * kSpeedOfLight / sigma_d;
  }
  throw std::invalid_argument("max_coherent_frequency: no threshold for P = " +
                              std::to_string(probability));
}

}  // namespace cohsync
