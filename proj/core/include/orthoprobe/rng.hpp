#pragma once

// Deterministic random helpers. Everything here is a pure function of its
// seed/state so that runs reproduce bit-for-bit across processes; none of the
// distribution sampling goes through std::*_distribution, whose output is
// implementation-defined.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace ortho::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable 64-bit FNV-1a hash; used to derive per-sentence seeds from ids.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Mixes two seeds into one well-dispersed seed.
inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a;
  splitmix64(state);
  state ^= b + 0x9e3779b97f4a7c15ULL;
  return splitmix64(state);
}

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (two draws per sample).
inline double gaussian(std::mt19937_64& gen) {
  const double u1 = static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(gen() >> 11) * 0x1.0p-53;       // [0, 1)
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Unbiased uniform integer in [0, n); n >= 1.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle driven by uniform_below, stable across platforms.
template <typename Container>
void shuffle(Container& items, std::mt19937_64& gen) {
  const std::size_t n = items.size();
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace ortho::rng
