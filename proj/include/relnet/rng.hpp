#pragma once

#include <cstdint>
#include <random>

namespace relnet {

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic sub-seed for (seed, a, b), so e.g. every edge gets its own
/// stream regardless of iteration order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(seed, a, b));
}

}  // namespace relnet
