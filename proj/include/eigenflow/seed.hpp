#pragma once

#include <cstdint>

namespace eigenflow {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(mix64(seed) ^ tag);
}

inline constexpr std::uint64_t kHaarStreamTag = 0x4861617273747265ULL;

/// Seed of trajectory `index` in dimension `dim`. Independent of which other
/// dimensions are part of the sweep.
constexpr std::uint64_t trajectory_seed(std::uint64_t base_seed, int dim, int index) {
  return mix64(mix64(mix64(base_seed) ^ static_cast<std::uint64_t>(dim)) ^
               static_cast<std::uint64_t>(index));
}

}  // namespace eigenflow
