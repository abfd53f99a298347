#include <cmath>
#include <complex>
#include <random>

#include "cohsync/constants.hpp"
#include "cohsync/fft.hpp"
#include "cohsync/signal.hpp"
#include "doctest.h"

using namespace cohsync;

namespace {

// O(N^2) DFT, no FFT library involved.
std::vector<Complex> slow_dft(std::span<const Complex> x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(k * t % n) / static_cast<double>(n);
      acc += x[t] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

double slow_beta2(const ComplexBasebandSignal& s) {
  const auto spec = slow_dft(s.samples());
  const std::size_t n = spec.size();
  const double fs = s.sample_rate();
  auto freq = [&](std::size_t k) {
    const double kk = k < (n + 1) / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
    return kk * fs / static_cast<double>(n);
  };
  double p = 0.0, m1 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    p += std::norm(spec[k]);
    m1 += freq(k) * std::norm(spec[k]);
  }
  const double centroid = m1 / p;
  double m2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = 2.0 * M_PI * (freq(k) - centroid);
    m2 += w * w * std::norm(spec[k]);
  }
  return m2 / p;
}

// Tones at -df and +df, which the two-tone generator does not render.
ComplexBasebandSignal symmetric_pair(double df, double width, double fs) {
  const auto n = static_cast<std::size_t>(std::lround(width * fs));
  std::vector<Complex> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ph = 2 * M_PI * df * static_cast<double>(k) / fs;
    x[k] = Complex(2.0 * std::cos(ph), 0.0);
  }
  return {x, fs};
}

}  // namespace

TEST_CASE("two-tone pulse for the deployed waveform") {
  const auto s = generate_two_tone({20e3, 7.52e6}, 143.7e-6, 25e6);
  CHECK(s.size() == 3592);
  CHECK(s.sample_rate() == 25e6);

  const std::size_t n = 4096;
  const auto spec = fft::forward(s.samples(), n);
  // Largest bin in each half of the band: one near f1, one near f2.
  auto peak_in = [&](double lo, double hi) {
    double best = -1.0, best_f = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double f = fft::bin_frequency(k, n, 25e6);
      if (f < lo || f > hi) continue;
      if (std::norm(spec[k]) > best) {
        best = std::norm(spec[k]);
        best_f = f;
      }
    }
    return best_f;
  };
  const double bin = 25e6 / static_cast<double>(n);
  CHECK(std::abs(peak_in(-1e6, 1e6) - 20e3) <= bin);
  CHECK(std::abs(peak_in(6e6, 9e6) - 7.52e6) <= bin);
  // Analytic tones only: nothing at the mirrored negative frequencies.
  CHECK(std::abs(peak_in(-9e6, -6e6)) > 0.0);
  double mirror = 0.0, total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency(k, n, 25e6);
    total += std::norm(spec[k]);
    if (f < -6e6 && f > -9e6) mirror += std::norm(spec[k]);
  }
  CHECK(mirror / total < 1e-3);
}

TEST_CASE("equal tones collapse to one exponential") {
  const auto s = generate_two_tone({1e6, 1e6}, 10e-6, 25e6);
  for (const auto& v : s.samples()) CHECK(std::abs(v) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("energy matches direct summation of the sample formula") {
  const double fs = 25e6, f1 = 20e3, f2 = 3.5e6;
  const auto s = generate_two_tone({f1, f2}, 143.7e-6, fs);
  double e = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = static_cast<double>(k) / fs;
    const double re = std::cos(2 * M_PI * f1 * t) + std::cos(2 * M_PI * f2 * t);
    const double im = std::sin(2 * M_PI * f1 * t) + std::sin(2 * M_PI * f2 * t);
    e += re * re + im * im;
  }
  CHECK(s.energy() == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("two-tone rejects aliasing and bad widths") {
  CHECK_THROWS_AS(generate_two_tone({20e3, 12.5e6}, 1e-5, 25e6), std::invalid_argument);
  CHECK_THROWS_AS(generate_two_tone({20e3, 3e6}, 0.0, 25e6), std::invalid_argument);
  CHECK_THROWS_AS(generate_two_tone({3e6, 20e3}, 1e-5, 25e6), std::invalid_argument);
}

TEST_CASE("disambiguation pulse is one period") {
  const auto d = generate_disambiguation(1.875e6, 25e6);
  CHECK(d.size() == 13);
  CHECK(d.duration() == doctest::Approx(533e-9).epsilon(0.03));

  const auto q = generate_disambiguation(25e6 / 4.0, 25e6);
  REQUIRE(q.size() == 4);
  const Complex expected[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(q.samples()[k] - expected[k]) < 1e-12);
  }
  CHECK_THROWS_AS(generate_disambiguation(13e6, 25e6), std::invalid_argument);
  CHECK(disambiguation_frequency_for({0.0, 7.5e6}) == doctest::Approx(1.875e6));
}

TEST_CASE("mean-squared bandwidth") {
  SUBCASE("symmetric pair at +/-3.75 MHz") {
    const auto s = symmetric_pair(3.75e6, 143.7e-6, 25e6);
    const double expected = std::pow(2 * M_PI * 3.75e6, 2);
    CHECK(mean_squared_bandwidth(s) == doctest::Approx(expected).epsilon(0.01));
  }
  SUBCASE("offset pair measured about its centroid") {
    const auto s = generate_two_tone({20e3, 7.52e6}, 143.7e-6, 25e6);
    CHECK(mean_squared_bandwidth(s) == doctest::Approx(std::pow(2 * M_PI * 3.75e6, 2)).epsilon(0.01));
    CHECK(spectral_centroid(s) == doctest::Approx(3.77e6).epsilon(0.01));
  }
  SUBCASE("DC only") {
    const ComplexBasebandSignal dc(std::vector<Complex>(64, {1.0, 0.0}), 1e6);
    CHECK(mean_squared_bandwidth(dc) == doctest::Approx(0.0));
  }
  SUBCASE("random pulse against brute-force DFT") {
    std::mt19937_64 eng(42);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Complex> x(97);
    for (auto& v : x) v = {n(eng), n(eng)};
    const ComplexBasebandSignal s(x, 1e6);
    CHECK(mean_squared_bandwidth(s) == doctest::Approx(slow_beta2(s)).epsilon(1e-9));
  }
  SUBCASE("zero energy rejected") {
    const ComplexBasebandSignal z(std::vector<Complex>(8), 1e6);
    CHECK_THROWS_AS(mean_squared_bandwidth(z), std::invalid_argument);
  }
}

TEST_CASE("Parseval") {
  const auto s = generate_two_tone({20e3, 5e6}, 50e-6, 25e6);
  const auto spec = fft::forward(s.samples(), s.size());
  double freq_energy = 0.0;
  for (const auto& v : spec) freq_energy += std::norm(v);
  freq_energy /= static_cast<double>(s.size());
  CHECK(freq_energy == doctest::Approx(s.energy()).epsilon(1e-9));
}

TEST_CASE("ranging bound") {
  // Fixture: (c/2) / (2 pi 3.75e6 sqrt(1e6)), evaluated by hand.
  const double fixture = 299792458.0 / 2.0 / (2.0 * 3.141592653589793 * 3.75e6 * 1000.0);
  CHECK(crlb_sigma_r(3.75e6, 1e6) == doctest::Approx(fixture).epsilon(1e-12));
  CHECK(fixture == doctest::Approx(6.3617935e-3).epsilon(1e-7));

  // Same bound through the numerically measured beta^2 of a long pulse.
  const auto s = symmetric_pair(3.75e6, 400e-6, 25e6);
  const double via_beta = kSpeedOfLight / 2.0 * crlb_sigma_t(mean_squared_bandwidth(s), 1e6);
  CHECK(via_beta == doctest::Approx(fixture).epsilon(0.01));

  CHECK(crlb_sigma_r(3.75e6, 4e6) == doctest::Approx(crlb_sigma_r(3.75e6, 1e6) / 2.0));
  CHECK(crlb_sigma_r(7.5e6, 1e6) == doctest::Approx(crlb_sigma_r(3.75e6, 1e6) / 2.0));
  CHECK(crlb_sigma_r(3.75e6, 1e300) < 1e-140);
  for (double rho : {1e2, 1e5, 1e9}) {
    CHECK(crlb_sigma_r(3.75e6, rho) * std::sqrt(rho) == doctest::Approx(fixture * 1000.0));
  }
  CHECK_THROWS_AS(crlb_sigma_r(0.0, 1e6), std::invalid_argument);
  CHECK_THROWS_AS(crlb_sigma_r(3.75e6, -1.0), std::invalid_argument);
}

TEST_CASE("post-processing SNR and separation inversion") {
  const auto s = generate_two_tone({20e3, 7.52e6}, 143.7e-6, 25e6);
  const double var = s.mean_power() / 100.0;  // 20 dB per sample
  CHECK(post_processing_snr(s.energy(), var) == doctest::Approx(2.0 * 3592 * 100.0));

  const double rho = 2.0 * 3592 * std::pow(10.0, 2.2);
  const double x = tone_separation_for_sigma(0.01, rho);
  // Averaging 5 estimates at separation x meets the target exactly.
  CHECK(crlb_sigma_r(x / 2.0, rho) / std::sqrt(5.0) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("waveform invariants") {
  WaveformConfig w;
  CHECK_NOTHROW(w.validate());
  w.pri = 100e-6;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  w = WaveformConfig{};
  w.disamb_pulse_width = 2.0 / w.f_d;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
