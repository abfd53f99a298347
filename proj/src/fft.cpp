#include "cohsync/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace cohsync::fft {
namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
// Plans are created once per (size, direction) on fftw_malloc'd buffers, and
// every execution uses buffers from fftw_malloc so the alignment matches.
struct PlanCache {
  std::mutex mutex;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex);
    auto it = plans.find({n, sign});
    if (it != plans.end()) return it->second;
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan plan =
        fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
    plans.emplace(std::make_pair(n, sign), plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};

std::vector<Complex> run(std::span<const Complex> in, std::size_t n, int sign) {
  if (n == 0) throw std::invalid_argument("fft: zero-length transform");
  std::unique_ptr<fftw_complex[], FftwDeleter> buf(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
  auto* data = reinterpret_cast<Complex*>(buf.get());
  const std::size_t m = std::min(n, in.size());
  std::copy_n(in.begin(), m, data);
  std::fill(data + m, data + n, Complex{});
  fftw_execute_dft(cache().get(n, sign), buf.get(), buf.get());
  return std::vector<Complex>(data, data + n);
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<Complex> forward(std::span<const Complex> in, std::size_t n) {
  return run(in, n, FFTW_FORWARD);
}

std::vector<Complex> inverse(std::span<const Complex> in, std::size_t n) {
  auto out = run(in, n, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

double bin_frequency(std::size_t k, std::size_t n, double sample_rate) {
  const auto ki = static_cast<double>(k);
  const auto ni = static_cast<double>(n);
  const double signed_k = (k < (n + 1) / 2) ? ki : ki - ni;
  return signed_k * sample_rate / ni;
}

}  // namespace cohsync::fft
