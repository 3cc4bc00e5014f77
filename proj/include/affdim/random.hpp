#pragma once

#include <cstdint>
#include <random>

namespace affdim {

using Rng = std::mt19937_64;

// splitmix64 finalizer; maps consecutive integers to well-separated seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed of stream `index` derived from `master` by fixed-stride splitting.
// Independent of how many streams are eventually requested, so results do
// not depend on worker counts.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master + 0xD1B54A32D192ED03ULL * (index + 1));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index) {
  return Rng{derive_seed(master, index)};
}

}  // namespace affdim
