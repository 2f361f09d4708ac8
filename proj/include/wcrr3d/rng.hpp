#pragma once

#include <cstdint>
#include <cmath>

namespace wcrr {

/// SplitMix64. Small, fast, and identical on every platform; used for
/// all randomness in the library so that fixed seeds reproduce
/// bit-identical outputs.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0, 1].
  double uniform01() {
    return double((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * double(next_u64() >> 11) * 0x1.0p-53;
  }

  int uniform_int(int n) {  // in [0, n)
    return int(next_u64() % std::uint64_t(n));
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

/// Mixes a seed with stream/counter indices into a fresh Rng. Used for
/// per-sample random streams: values do not depend on evaluation order
/// or thread count.
inline Rng counter_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  Rng mix(seed);
  std::uint64_t a = mix.next_u64() ^ (stream * 0xd1342543de82ef95ULL);
  std::uint64_t b = mix.next_u64() ^ (counter * 0xaf251af3b0f025b5ULL);
  Rng out(a ^ (b + 0x9e3779b97f4a7c15ULL));
  out.next_u64();
  return out;
}

}  // namespace wcrr
