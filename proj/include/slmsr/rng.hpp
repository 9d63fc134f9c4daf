#pragma once

#include <cstdint>
#include <cmath>

namespace slmsr {

// SplitMix64: small, portable, seedable generator. All random data in the
// project is a pure function of (seed, stream index, draw index) so results
// are identical across platforms and runs.
struct SplitMix64 {
  uint64_t state;

  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo,hi).
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Standard normal via Box-Muller (avoids libstdc++-specific distributions).
  double next_normal() {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

// Stream splitting: an independent generator for stream `index` of a seed.
inline SplitMix64 split_stream(uint64_t seed, uint64_t index) {
  SplitMix64 mix(seed ^ (0xd1342543de82ef95ULL * (index + 1)));
  mix.next_u64();
  return mix;
}

}  // namespace slmsr
