#include "ua/common/checksum.hpp"

namespace ua {

namespace {
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}

void Fnv1a64::update(std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    state_ ^= b;
    state_ *= kFnvPrime;
  }
}

void Fnv1a64::update(std::string_view bytes) {
  for (char c : bytes) {
    state_ ^= static_cast<std::uint8_t>(c);
    state_ *= kFnvPrime;
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return h.digest();
}

}  // namespace ua
