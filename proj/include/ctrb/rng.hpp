#pragma once

#include <cmath>
#include <cstdint>

namespace ctrb {

// SplitMix64: 64-bit state, seedable, splittable by stream index.
// All draws are defined in terms of integer operations plus explicit
// float conversion, so sequences are identical across platforms. The
// standard <random> distributions do not give that guarantee.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Derive an independent generator for a named stream without
  // disturbing this generator's state.
  SplitMix64 split(std::uint64_t stream) const {
    SplitMix64 mixer(state_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    return SplitMix64(mixer.next_u64());
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound). Rejection keeps the draw unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller. Two uniforms per draw; no cached
  // second value, so the stream position is a pure function of the
  // number of calls.
  double next_gaussian() {
    double u1 = next_double();
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ctrb
