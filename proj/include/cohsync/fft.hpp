#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cohsync::fft {

using Complex = std::complex<double>;

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

/// Forward DFT of `in` zero-padded (or truncated) to `n` points.
std::vector<Complex> forward(std::span<const Complex> in, std::size_t n);

/// Inverse DFT, normalized by 1/n so that inverse(forward(x)) == x.
std::vector<Complex> inverse(std::span<const Complex> in, std::size_t n);

/// Signed frequency (Hz) of DFT bin k for an n-point transform.
double bin_frequency(std::size_t k, std::size_t n, double sample_rate);

}  // namespace cohsync::fft
