#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ua {

// Quantization level count per latent dimension, e.g. {8, 8, 8, 6, 5}.
using Levels = std::vector<int>;

// One quantized latent timestep: entry i lies in [0, levels[i]).
using LatentCode = std::vector<int>;

std::int64_t codebook_size(const Levels& levels);

// Rounds half away from zero (std::round semantics), named for clarity at
// call sites.
double round_half_away(double x);

// v_i = clamp(round_half_away((tanh(z_i) + 1) / 2 * (l_i - 1)), 0, l_i - 1).
// Throws DimensionError when the lengths differ.
LatentCode fsq_quantize(std::span<const double> z, const Levels& levels);

// Normalized value the decoder consumes: 2 v / (l - 1) - 1, in [-1, 1].
double dequantize_level(int v, int level);
std::vector<double> dequantize(const LatentCode& code, const Levels& levels);

// Mixed-radix index with dimension 0 most significant. Throws RangeError for
// out-of-range digits or indices.
std::int64_t code_index(const LatentCode& code, const Levels& levels);
LatentCode index_code(std::int64_t index, const Levels& levels);

}  // namespace ua
