#pragma once

// Seeding and sampling helpers with platform-independent output.
//
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so everything that must reproduce bit-for-bit goes through these.

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>

namespace cadaug {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

/// Seed for a named stage: splitmix64(master ^ fnv1a(tag)).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(master ^ h);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(Rng &rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % n + 1) % n;
  for (;;) {
    std::uint64_t x = rng();
    if (x <= limit)
      return x % n;
  }
}

/// Uniform double in [0, 1).
inline double uniform_unit(Rng &rng) {
  return static_cast<double>(rng() >> 11U) * 0x1.0p-53;
}

template <typename It>
void shuffle(It first, It last, Rng &rng) {
  auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    auto j = uniform_below(rng, i);
    using std::swap;
    swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
  }
}

} // namespace cadaug
