#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cohsync {

/// Natural cubic spline through (x[i], y[i]) with strictly increasing x.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::vector<double> x, std::vector<double> y);

  double operator()(double t) const;
  double derivative(double t) const;

  double front() const noexcept { return x_.front(); }
  double back() const noexcept { return x_.back(); }

  /// Location of the largest spline value on [lo, hi] (clipped to the knot
  /// span). Candidates are the interval ends and every root of the piecewise
  /// quadratic derivative, so the result is exact for the spline.
  double argmax(double lo, double hi) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

/// Band-limited interpolation of a uniformly sampled complex sequence with a
/// Kaiser-windowed sinc kernel, normalized to unit DC gain. Kernel taps are
/// tabulated for `phases` evenly spaced fractional offsets, so evaluation at
/// t = n + j / phases costs 2 * half_taps multiply-adds.
class WindowedSincInterpolator {
 public:
  WindowedSincInterpolator(int half_taps, double kaiser_beta, int phases);

  /// Value at fractional index t = n + j / phases (j in [0, phases)). Samples
  /// outside the sequence are zero.
  std::complex<double> at(std::span<const std::complex<double>> x, long n,
                          int j) const;

  int half_taps() const noexcept { return half_taps_; }
  int phases() const noexcept { return phases_; }

 private:
  int half_taps_;
  int phases_;
  std::vector<double> table_;  // phases_ rows of 2 * half_taps_ taps
};

}  // namespace cohsync
