#pragma once

#include <cstdint>
#include <random>

namespace tofa {

// Deterministic seeding and draws. The standard <random> distributions are
// implementation-defined, so every stochastic component in the toolkit goes
// through these helpers to keep reports reproducible across toolchains.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (seed, stream, index), e.g. one per job instance.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0,
                                  std::uint64_t index = 0) {
  return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Unbiased uniform integer in [0, bound), bound > 0. Rejection sampling.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace tofa
