#include "cohsync/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cohsync/constants.hpp"

namespace cohsync {

NaturalCubicSpline::NaturalCubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) {
    throw std::invalid_argument("spline: need at least two matching knots");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline: knots must increase");
  }
  m_.assign(n, 0.0);
  if (n == 2) return;

  // Tridiagonal system for interior second derivatives (Thomas algorithm).
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x_[i + 1] - x_[i];
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i >= 1; --i) {
    m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
  }
}

std::size_t NaturalCubicSpline::segment(double t) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double NaturalCubicSpline::operator()(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double NaturalCubicSpline::derivative(double t) const {
  const std::size_t i = segment(t);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

double NaturalCubicSpline::argmax(double lo, double hi) const {
  lo = std::max(lo, x_.front());
  hi = std::min(hi, x_.back());
  if (hi < lo) throw std::invalid_argument("spline: empty search interval");

  double best_t = lo;
  double best_v = (*this)(lo);
  auto consider = [&](double t) {
    const double v = (*this)(t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  };
  consider(hi);

  for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
    const double x0 = x_[i];
    const double x1 = x_[i + 1];
    if (x1 < lo || x0 > hi) continue;
    // On [x0, x1] with u = t - x0 the derivative is p0 + p1 u + p2 u^2.
    const double h = x1 - x0;
    const double m0 = m_[i];
    const double m1 = m_[i + 1];
    const double p0 = (y_[i + 1] - y_[i]) / h - h * (2.0 * m0 + m1) / 6.0;
    const double p1 = m0;
    const double p2 = (m1 - m0) / (2.0 * h);
    double roots[2];
    int count = 0;
    if (std::abs(p2) < 1e-300) {
      if (p1 != 0.0) roots[count++] = -p0 / p1;
    } else {
      const double disc = p1 * p1 - 4.0 * p2 * p0;
      if (disc >= 0.0) {
        // Numerically stable quadratic roots.
        const double q = -0.5 * (p1 + std::copysign(std::sqrt(disc), p1));
        roots[count++] = q / p2;
        if (q != 0.0) roots[count++] = p0 / q;
      }
    }
    for (int r = 0; r < count; ++r) {
      const double t = x0 + roots[r];
      if (t >= std::max(x0, lo) && t <= std::min(x1, hi)) consider(t);
    }
  }
  return best_t;
}

namespace {

// Modified Bessel function of the first kind, order zero (power series).
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

WindowedSincInterpolator::WindowedSincInterpolator(int half_taps, double kaiser_beta,
                                                   int phases)
    : half_taps_(half_taps), phases_(phases) {
  if (half_taps < 1 || phases < 1 || !(kaiser_beta >= 0.0)) {
    throw std::invalid_argument("interpolator: invalid kernel parameters");
  }
  const int taps = 2 * half_taps_;
  table_.resize(static_cast<std::size_t>(phases_) * static_cast<std::size_t>(taps));
  const double norm = bessel_i0(kaiser_beta);
  for (int j = 0; j < phases_; ++j) {
    const double frac = static_cast<double>(j) / phases_;
    double* row = &table_[static_cast<std::size_t>(j) * static_cast<std::size_t>(taps)];
    double gain = 0.0;
    for (int i = 0; i < taps; ++i) {
      // Tap i multiplies sample n - half_taps + 1 + i; d is t minus that index.
      const double d = frac + static_cast<double>(half_taps_ - 1 - i);
      const double r = d / half_taps_;
      const double w = (std::abs(r) >= 1.0)
                           ? 0.0
                           : bessel_i0(kaiser_beta * std::sqrt(1.0 - r * r)) / norm;
      const double sinc = (d == 0.0) ? 1.0 : std::sin(kPi * d) / (kPi * d);
      row[i] = sinc * w;
      gain += row[i];
    }
    for (int i = 0; i < taps; ++i) row[i] /= gain;
  }
}

std::complex<double> WindowedSincInterpolator::at(std::span<const std::complex<double>> x,
                                                  long n, int j) const {
  if (j == 0 && n >= 0 && n < static_cast<long>(x.size())) return x[static_cast<std::size_t>(n)];
  const int taps = 2 * half_taps_;
  const double* row = &table_[static_cast<std::size_t>(j) * static_cast<std::size_t>(taps)];
  const long first = n - half_taps_ + 1;
  std::complex<double> acc{};
  const long size = static_cast<long>(x.size());
  const long i0 = std::max(0L, -first);
  const long i1 = std::min(static_cast<long>(taps), size - first);
  for (long i = i0; i < i1; ++i) acc += row[i] * x[static_cast<std::size_t>(first + i)];
  return acc;
}

}  // namespace cohsync
