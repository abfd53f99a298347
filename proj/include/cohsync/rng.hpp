#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace cohsync {

/// SplitMix64: small counter-based generator used for per-trial streams and
/// for deriving child seeds. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Deterministic child seed: folds each counter into the parent through one
/// SplitMix64 step. derive_seed(s, {a, b}) never depends on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> counters) noexcept {
  std::uint64_t s = parent;
  for (std::uint64_t c : counters) {
    SplitMix64 g(s ^ (c * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
    s = g();
  }
  return s;
}

}  // namespace cohsync
