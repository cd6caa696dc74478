#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tnt {

using Rng = std::mt19937_64;

// Derives an independent engine for a named sub-stream of the root seed.
// The same (seed, name, a, b) always yields the same engine state.
Rng make_stream(std::uint64_t root_seed, std::string_view name,
                std::uint64_t a = 0, std::uint64_t b = 0);

// Uniform double in [0, 1) with 53 bits of randomness; identical across
// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), n > 0, by rejection.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace tnt
