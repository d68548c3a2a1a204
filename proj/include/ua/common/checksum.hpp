#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace ua {

// 64-bit FNV-1a. Used as the trailing integrity word of binary parameter files.
class Fnv1a64 {
 public:
  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view bytes);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace ua
