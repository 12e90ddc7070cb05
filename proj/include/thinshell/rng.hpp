#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace thinshell {

// Counter-based random stream: every draw is a pure function of
// (seed, path_id, lane, step).  Monte Carlo workers can therefore generate
// any subset of draws in any order and still agree bit-for-bit.

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_counter(std::uint64_t seed, std::uint64_t path_id, std::uint64_t lane,
                                  std::uint64_t step) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ path_id);
  h = splitmix64(h ^ lane);
  h = splitmix64(h ^ step);
  return h;
}

// standard normal via Box-Muller on two splitmix64 outputs seeded by the counter
inline double normal_draw(std::uint64_t seed, std::uint64_t path_id, std::uint64_t lane,
                          std::uint64_t step) {
  const std::uint64_t base = hash_counter(seed, path_id, lane, step);
  const std::uint64_t r1 = splitmix64(base);
  const std::uint64_t r2 = splitmix64(r1);
  const double u1 = static_cast<double>((r1 >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(r2 >> 11) * 0x1.0p-53;       // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi_v<double> * u2);
}

}  // namespace thinshell
