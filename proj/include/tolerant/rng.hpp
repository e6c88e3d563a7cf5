#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tolerant {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream keyed by a master seed and a path of indices, e.g. (master, scale, seed).
/// Streams with different keys are statistically independent and do not depend on
/// the order in which they are created.
inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t h = splitmix64(master ^ 0x5851f42d4c957f2dULL);
  for (std::uint64_t key : path) h = splitmix64(h ^ splitmix64(key + 0x632be59bd9b4e019ULL));
  return Rng(h);
}

/// Child stream derived from the next output of a parent stream.
inline Rng fork_stream(Rng& parent, std::uint64_t key = 0) {
  return Rng(splitmix64(parent() ^ splitmix64(key)));
}

/// Uniform in (0, 1] with 53 bits of resolution.
inline double uniform_open_closed(Rng& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

/// Uniform in [0, 1).
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline bool fair_coin(Rng& rng) { return (rng() >> 63) != 0; }

/// Uniform index in [0, n). Requires n >= 1.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

}  // namespace tolerant
