#pragma once

#include <cstdint>
#include <string_view>

#include "ua/codec/codec.hpp"

namespace ua {

// Global token ranges:
//   text        [0, 130076]   (word vocabulary, delimiters at the tail)
//   SOM          130077
//   EOM          130078
//   motion      [130079, 145438]   15,360 codes
//   music       [145439, 151582]    6,144 codes
//   trajectory  [151583, 151642]       60 bins
enum class Modality { kText, kSom, kEom, kMotion, kMusic, kTrajectory };

inline constexpr TokenId kTextSize = 130077;
inline constexpr TokenId kSom = 130077;
inline constexpr TokenId kEom = 130078;
inline constexpr TokenId kMotionStart = 130079;
inline constexpr TokenId kMotionSize = 15360;
inline constexpr TokenId kMusicStart = 145439;
inline constexpr TokenId kMusicSize = 6144;
inline constexpr TokenId kTrajectoryStart = 151583;
inline constexpr TokenId kTrajectorySize = 60;
inline constexpr TokenId kVocabSize = 151643;

// Condition delimiters, the last six ids of the text range.
inline constexpr TokenId kTextOpen = 130071;
inline constexpr TokenId kTextClose = 130072;
inline constexpr TokenId kMusicOpen = 130073;
inline constexpr TokenId kMusicClose = 130074;
inline constexpr TokenId kTrajectoryOpen = 130075;
inline constexpr TokenId kTrajectoryClose = 130076;
// Word ids must stay below the delimiters.
inline constexpr TokenId kMaxWordId = kTextOpen - 1;

struct LocalToken {
  Modality modality;
  TokenId local;
  bool operator==(const LocalToken&) const = default;
};

TokenId modality_start(Modality m);
TokenId modality_size(Modality m);
std::string_view modality_name(Modality m);

// Throws RangeError when `local` is outside the modality's range.
TokenId to_global(Modality m, TokenId local);
// Throws RangeError for ids outside [0, kVocabSize).
LocalToken from_global(TokenId global);

inline bool is_motion(TokenId global) {
  return global >= kMotionStart && global < kMotionStart + kMotionSize;
}

}  // namespace ua
