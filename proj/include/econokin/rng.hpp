#pragma once

#include <cstdint>

namespace econokin {

// SplitMix64 step; used to expand seeds into full generator state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256++ — small, fast, platform-independent 64-bit generator.
// Streams for parallel work are derived with make_stream(seed, index);
// distinct indices give statistically independent sequences.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed = 1) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1].
  double next_double_open_low() { return 1.0 - next_double(); }

  // Unbiased uniform integer in [0, n), Lemire's method.
  std::uint32_t bounded(std::uint32_t n) {
    std::uint64_t x = next() & 0xFFFFFFFFULL;
    std::uint64_t m = x * n;
    std::uint32_t lo = static_cast<std::uint32_t>(m);
    if (lo < n) {
      const std::uint32_t threshold = (0u - n) % n;
      while (lo < threshold) {
        x = next() & 0xFFFFFFFFULL;
        m = x * n;
        lo = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Deterministic per-stream generator: the same (seed, index) pair always
// yields the same sequence, regardless of how work is scheduled.
inline Xoshiro256pp make_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t mix = seed;
  (void)splitmix64(mix);  // decouple raw seed from stream 0
  mix ^= 0xA0761D6478BD642FULL * (index + 1);
  return Xoshiro256pp(mix);
}

}  // namespace econokin
