#include "ua/codec/fsq.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

std::int64_t codebook_size(const Levels& levels) {
  std::int64_t n = 1;
  for (int l : levels) {
    if (l < 2) throw ConfigError("every quantization level count must be >= 2");
    n *= l;
  }
  return n;
}

double round_half_away(double x) { return std::round(x); }

LatentCode fsq_quantize(std::span<const double> z, const Levels& levels) {
  if (z.size() != levels.size()) {
    throw DimensionError(fmt::format("latent has {} dims, levels has {}", z.size(), levels.size()));
  }
  LatentCode code(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double top = static_cast<double>(levels[i] - 1);
    const double scaled = (std::tanh(z[i]) + 1.0) * 0.5 * top;
    code[i] = static_cast<int>(std::clamp(round_half_away(scaled), 0.0, top));
  }
  return code;
}

double dequantize_level(int v, int level) {
  return 2.0 * static_cast<double>(v) / static_cast<double>(level - 1) - 1.0;
}

std::vector<double> dequantize(const LatentCode& code, const Levels& levels) {
  std::vector<double> out(code.size());
  for (std::size_t i = 0; i < code.size(); ++i) out[i] = dequantize_level(code[i], levels[i]);
  return out;
}

std::int64_t code_index(const LatentCode& code, const Levels& levels) {
  if (code.size() != levels.size()) throw DimensionError("code and levels differ in length");
  std::int64_t index = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (code[i] < 0 || code[i] >= levels[i]) {
      throw RangeError(fmt::format("code digit {} = {} outside [0, {})", i, code[i], levels[i]));
    }
    index = index * levels[i] + code[i];
  }
  return index;
}

LatentCode index_code(std::int64_t index, const Levels& levels) {
  const std::int64_t size = codebook_size(levels);
  if (index < 0 || index >= size) {
    throw RangeError(fmt::format("code index {} outside [0, {})", index, size));
  }
  LatentCode code(levels.size());
  for (std::size_t i = levels.size(); i-- > 0;) {
    code[i] = static_cast<int>(index % levels[i]);
    index /= levels[i];
  }
  return code;
}

}  // namespace ua
