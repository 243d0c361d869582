#pragma once

// Deterministic pseudo-random numbers.
//
// Generator: xoshiro256** (Blackman & Vigna, 2018), state seeded through
// SplitMix64. Every draw is defined in terms of 64-bit integer operations,
// so a given seed yields the same stream on every platform. Nothing in the
// library uses <random> distributions, whose output is
// implementation-defined.
//
// Stream splitting: `SeededRng::stream(seed, index)` derives an independent
// generator for sub-task `index` (e.g. one bootstrap resample) as
//   child_seed = splitmix64(seed ^ splitmix64(index + 0x9E3779B97F4A7C15))
// so work can be distributed across threads and reassembled by index.

#include <array>
#include <cstdint>
#include <limits>

#include "rlrepro/special/normal.hpp"

namespace rlrepro {

/// SplitMix64 finalizer applied to `x + golden gamma`.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for sub-stream `index` of master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return splitmix64(seed ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
}

class SeededRng {
 public:
  using result_type = std::uint64_t;
  static constexpr const char* algorithm = "xoshiro256**/splitmix64";

  explicit SeededRng(std::uint64_t seed) noexcept : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      s = splitmix64(x);
      x += 0x9E3779B97F4A7C15ULL;
    }
  }

  static SeededRng stream(std::uint64_t seed, std::uint64_t index) noexcept {
    return SeededRng(derive_seed(seed, index));
  }

  std::uint64_t seed() const noexcept { return seed_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
  std::uint64_t bounded(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal variate by inversion.
  double normal() { return special::std_normal_quantile(uniform_open()); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace rlrepro
