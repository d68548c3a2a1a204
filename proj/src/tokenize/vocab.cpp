#include "ua/tokenize/vocab.hpp"

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

TokenId modality_start(Modality m) {
  switch (m) {
    case Modality::kText: return 0;
    case Modality::kSom: return kSom;
    case Modality::kEom: return kEom;
    case Modality::kMotion: return kMotionStart;
    case Modality::kMusic: return kMusicStart;
    case Modality::kTrajectory: return kTrajectoryStart;
  }
  throw RangeError("unknown modality");
}

TokenId modality_size(Modality m) {
  switch (m) {
    case Modality::kText: return kTextSize;
    case Modality::kSom:
    case Modality::kEom: return 1;
    case Modality::kMotion: return kMotionSize;
    case Modality::kMusic: return kMusicSize;
    case Modality::kTrajectory: return kTrajectorySize;
  }
  throw RangeError("unknown modality");
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kText: return "text";
    case Modality::kSom: return "som";
    case Modality::kEom: return "eom";
    case Modality::kMotion: return "motion";
    case Modality::kMusic: return "music";
    case Modality::kTrajectory: return "trajectory";
  }
  return "?";
}

TokenId to_global(Modality m, TokenId local) {
  if (local < 0 || local >= modality_size(m)) {
    throw RangeError(fmt::format("{} id {} out of range", modality_name(m), local));
  }
  return modality_start(m) + local;
}

LocalToken from_global(TokenId global) {
  if (global < 0 || global >= kVocabSize) {
    throw RangeError(fmt::format("global id {} outside [0, {})", global, kVocabSize));
  }
  for (Modality m : {Modality::kTrajectory, Modality::kMusic, Modality::kMotion, Modality::kEom,
                     Modality::kSom, Modality::kText}) {
    if (global >= modality_start(m)) return {m, global - modality_start(m)};
  }
  throw RangeError("unreachable");
}

}  // namespace ua
