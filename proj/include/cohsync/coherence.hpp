#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cohsync/constants.hpp"

namespace cohsync {

/// G_c = |sum a_n e^{j eps_n}|^2 / |sum a_n|^2.
///
/// Throws std::invalid_argument on mismatched lengths, negative amplitudes or
/// an all-zero amplitude vector.
double coherent_gain(std::span<const double> phase_errors, std::span<const double> amplitudes);

/// Unit amplitudes.
double coherent_gain(std::span<const double> phase_errors);

/// How a node's frequency-sync path contributes phase error.
enum class SyncPhaseModel {
  kNone,            // steering error only
  kRangingCoupled,  // the node's range error also biases its sync-path phase correction
  kGaussian,        // independent N(0, sync_phase_sigma^2) per node
};

enum class ChannelMagnitude { kUnity, kRayleigh };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Randomized open-loop array. Node positions lie on a line with spacings
/// drawn from node_spacing_range; each node's range estimate to its
/// neighbour carries an N(0, sigma_d^2) error that corrupts the steering
/// correction 2*pi/lambda * d * sin(theta) and, under kRangingCoupled, the
/// sync-path correction 2*pi/lambda * r.
struct ArrayScenario {
  int n_nodes = 2;
  double wavelength = 1.0;                       // m
  double sigma_d = 0.0;                          // m
  Interval theta_range{-kPi / 2.0, kPi / 2.0};   // rad
  std::optional<double> fixed_theta;             // rad, overrides theta_range
  Interval node_spacing_range{1.0, 100.0};       // wavelengths
  Interval sync_distance_range{1.0, 100.0};      // wavelengths
  double calib_error = 0.0;                      // rad, added to every non-reference node
  SyncPhaseModel sync_phase = SyncPhaseModel::kRangingCoupled;
  double sync_phase_sigma = 0.0;                 // rad, kGaussian only
  bool reference_node_exact = true;              // node 0 defines the phase reference
  ChannelMagnitude channel = ChannelMagnitude::kUnity;

  void validate() const;
};

struct GainSample {
  double g_c = 1.0;
};

/// One random array realization. Identical seeds give identical samples,
/// and for a fixed seed the draws do not depend on sigma_d (errors are
/// sigma_d times a fixed standard normal).
GainSample sample_gain(const ArrayScenario& scenario, std::uint64_t seed);

struct ProbabilityCurve {
  std::vector<double> sigma_d;      // m
  std::vector<double> probability;  // P(G_c >= threshold)
  std::vector<double> std_error;    // binomial standard error
  double threshold = 0.9;
  std::size_t trials = 0;
};

/// P(G_c >= threshold) at each sigma_d. Trial t uses derive_seed(seed, {t})
/// at every grid point, so the curve is evaluated on common random numbers.
ProbabilityCurve probability_curve(const ArrayScenario& base, std::span<const double> sigma_grid,
                                   double threshold, std::size_t trials, std::uint64_t seed);

/// True when no later grid point exceeds an earlier one by more than
/// `bands` combined standard errors.
bool is_monotone_within_bands(const ProbabilityCurve& curve, double bands = 2.0);

/// sigma_d where the curve first falls to `probability`, linearly
/// interpolated between grid points. Empty when the curve never gets there.
std::optional<double> threshold_sigma(const ProbabilityCurve& curve, double probability);

/// sigma_d / lambda keyed by probability.
using ThresholdTable = std::map<double, double>;

/// 0.9 -> 0.0495, 0.8 -> 0.0725, 0.7 -> 0.1040 (two nodes, G_c >= 0.9).
ThresholdTable default_threshold_table();

/// Table from a curve computed at wavelength `wavelength`.
ThresholdTable threshold_table_from_curve(const ProbabilityCurve& curve, double wavelength,
                                          std::span<const double> probabilities);

/// Highest carrier (Hz) whose wavelength keeps sigma_d at or below the
/// threshold for `probability`: k(P) * c / sigma_d.
double max_coherent_frequency(double sigma_d, double probability,
                              const ThresholdTable& table = default_threshold_table());

}  // namespace cohsync
