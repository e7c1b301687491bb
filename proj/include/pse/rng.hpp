#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace pse {

// Counter-based deterministic random stream keyed by (seed, purpose tag,
// index). Values are independent of evaluation order, so parallel sweeps and
// resampling reproduce the same draws.
namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Stream {
  std::uint64_t key;

  Stream(std::uint64_t seed, std::string_view tag, std::uint64_t index)
      : key(splitmix64(splitmix64(seed ^ fnv1a(tag)) ^ index)) {}

  // k-th raw 64-bit word of this stream.
  std::uint64_t word(std::uint64_t k) const { return splitmix64(key + k); }

  // uniform in [0, 1)
  double uniform01(std::uint64_t k) const {
    return static_cast<double>(word(k) >> 11) * 0x1.0p-53;
  }

  // uniform in [-cap, cap]
  double uniform_sym(std::uint64_t k, double cap) const {
    return cap * (2.0 * uniform01(k) - 1.0);
  }

  // standard normal via Box-Muller on the (2k, 2k+1) pair
  double normal(std::uint64_t k) const {
    const double u1 = uniform01(2 * k);
    const double u2 = uniform01(2 * k + 1);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * M_PI * u2);
  }
};

}  // namespace rng
}  // namespace pse
