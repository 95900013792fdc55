#pragma once

#include <cmath>
#include <cstdint>

namespace runlab {

// Counter-based RNG: every draw is a pure function of (key, stream, counter),
// so parallel consumers can draw in any order and replays are exact.
struct CounterRng {
  std::uint64_t key = 0;

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const {
    return mix(mix(mix(key) ^ stream) ^ counter);
  }

  // uniform in the open interval (0,1)
  double u01(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // standard normal via Box-Muller; consumes counters (counter, counter+1)
  double normal(std::uint64_t stream, std::uint64_t counter) const {
    const double u1 = u01(stream, counter);
    const double u2 = u01(stream, counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
};

}  // namespace runlab
