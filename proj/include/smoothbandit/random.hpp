#pragma once

#include <cstdint>
#include <random>

namespace smoothbandit {

using Rng = std::mt19937_64;

/// Independent streams carved out of one trial seed. Each consumer gets its
/// own stream so that, e.g., reward draws stay identical across policy
/// variants even though allocations (and hence response draws) differ.
enum class Stream : std::uint64_t {
  arms = 1,
  responses = 2,
  policy = 3,
  change_point = 4,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stable, platform-independent hash of (base_seed, index).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

Rng make_stream(std::uint64_t seed, Stream stream);

}  // namespace smoothbandit
