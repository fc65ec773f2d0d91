#pragma once

#include <cstdint>

namespace matchlab {

// Deterministic stream RNG.
//
// Every trial of every experiment gets its own stream, keyed by
// (root seed, experiment id, n, trial index). Streams are derived by
// feeding the key through a SplitMix64 chain, so results do not depend on
// scheduling order and any single trial can be replayed in isolation.
// Uniform doubles are produced by the 53-bit shift construction rather than
// std::uniform_real_distribution, whose output is implementation-defined;
// this keeps byte-identical results across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Warm up so that low-entropy keys (seed 0, trial 0) decorrelate.
    next_u64();
    next_u64();
  }

  static Rng from_key(std::uint64_t seed, std::uint64_t experiment_id,
                      std::uint64_t n, std::uint64_t trial) {
    std::uint64_t s = seed;
    s = mix(s ^ 0x9e3779b97f4a7c15ULL);
    s = mix(s ^ experiment_id);
    s = mix(s ^ n);
    s = mix(s ^ trial);
    return Rng(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, 1, ..., bound-1} by rejection (no modulo bias).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace matchlab
