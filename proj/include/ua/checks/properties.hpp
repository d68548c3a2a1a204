#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace ua {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Every index of the default codebook survives index_code / code_index, and
// every code survives dequantize / fsq_quantize.
CheckResult check_fsq_bijection();

// Analytic vs central-difference codec gradients on small randomized codecs
// (downsample 2 and 4); passes when the worst relative error is below 1e-4.
CheckResult check_codec_gradients(std::uint64_t seed = 15);

// For `sequences` random token sequences, frames from random push
// partitions equal the whole-sequence decode bit for bit, and every prefix
// decode equals the matching leading frames.
CheckResult check_causality(std::size_t sequences = 1000, std::uint64_t seed = 21);

}  // namespace ua
