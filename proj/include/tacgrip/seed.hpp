#pragma once

#include <cstdint>

namespace tacgrip {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial stream seed: splitmix64(seed + golden * (index + 1)).
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Independent sub-stream of a trial seed (plant noise, grains, poses, ...).
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

}  // namespace tacgrip
