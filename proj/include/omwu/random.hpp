#pragma once

#include <cstdint>

namespace omwu {

/// Counter-based SplitMix64: draw k of stream `seed` is
/// mix(seed + (k + 1) * 0x9E3779B97F4A7C15), where mix is the SplitMix64
/// finalizer. Any draw can be computed independently of the others, so a
/// stream is reproducible regardless of evaluation order or threading.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit constexpr SplitMix64(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(seed_ + (counter + 1) * kGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform01(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform01(counter);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Derives an independent seed for a sub-stream, e.g. one trial of a sweep.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return SplitMix64::mix(SplitMix64::mix(seed ^ SplitMix64::mix(a + 0x632BE59BD9B4E019ULL)) + b);
}

}  // namespace omwu
