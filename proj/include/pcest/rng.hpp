#pragma once

#include <cstdint>
#include <random>

namespace pcest {

/// The library-wide pseudo-random engine. Distributions are the standard
/// library's, so bitwise reproducibility holds for a fixed toolchain.
using Rng = std::mt19937_64;

/// Independent child engine for work item `index` of a run seeded with
/// `seed`. Parallel and serial loops that derive per-item engines this way
/// produce identical results.
inline Rng child_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace pcest
