#pragma once

#include <cstdint>
#include <random>

namespace ua {

using Rng = std::mt19937_64;

// Derives an independent seed for sub-stream `stream` of `seed` (splitmix64
// finalizer), so parallel or per-item work stays reproducible.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(derive_seed(seed, stream));
}

// Uniform double in [0, 1) with a fixed mapping from the engine output, so
// results do not depend on the standard library's distribution internals.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ua
