#pragma once

#include <cstdint>
#include <vector>

#include "ua/motion/motion.hpp"

namespace ua {

// Synthetic joint-space corpus: every DOF is a sum of at most three
// sinusoids with total amplitude <= 1 rad. Sequences are drawn from a small
// set of "styles" (shared base frequency and per-DOF harmonic pattern), each
// sequence varying tempo, phase and overall amplitude, the way recorded
// motion clusters around a limited repertoire of behaviours.
struct SinusoidCorpusOptions {
  std::size_t num_sequences = 1000;
  std::size_t frames = 96;
  std::size_t num_styles = 8;
  double fps = kCanonicalFps;
  std::uint64_t seed = 7;
};

std::vector<MotionSequence> sinusoid_corpus(const SinusoidCorpusOptions& options);

// `count` copies of the same constant pose (values in [-0.5, 0.5] rad).
std::vector<MotionSequence> constant_corpus(std::size_t count, std::size_t frames,
                                            std::uint64_t seed);

}  // namespace ua
