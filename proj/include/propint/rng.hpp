#pragma once

#include <cstdint>

namespace propint {

/// SplitMix64 output function (Steele, Lea, Flood 2014).
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Minimal SplitMix64 generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_u01() < p; }

 private:
  std::uint64_t state_;
};

/// Stream-derivation rule for reproducible, partition-independent
/// simulation: replication i of a run seeded with `seed` draws from a
/// SplitMix64 generator whose initial state is
///   mix64(seed + (i + 1) * 0x9E3779B97F4A7C15).
/// Each replication owns its stream, so splitting replications across
/// workers cannot change any draw.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL));
}

}  // namespace propint
