// Seeded random streams. Every unit of parallel work derives its own
// engine from (seed, a, b), so results do not depend on scheduling.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace siv {

using Rng = std::mt19937_64;

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return mix64(mix64(mix64(seed) ^ a) ^ (b + 0x632BE59BD9B4E019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(stream_seed(seed, a, b));
}

// n indices drawn uniformly from [0, N) with replacement.
std::vector<std::size_t> sample_with_replacement(Rng& rng, std::size_t N, std::size_t n);
// n distinct indices from [0, N) by partial Fisher-Yates, in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t N, std::size_t n);

}  // namespace siv
