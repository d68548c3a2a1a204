#pragma once

#include <span>
#include <vector>

#include "ua/augment/features.hpp"

namespace ua {

struct MotionClip {
  int id = 0;
  MotionSequence frames;
  std::vector<MatchFeature> features;  // one per frame
  std::size_t source_start = 0;        // first frame in the source sequence
  double mean_speed = 0.0;             // horizontal path length / duration, m/s
  double total_turn_deg = 0.0;         // summed heading change
};

struct SegmentOptions {
  double min_duration_s = 2.0;
  double max_duration_s = 4.0;
  int min_cycles = 2;
  // Frames kept past the closing heel strike, so consecutive clips can be
  // blended phase-aligned: the clip's frame size() - tail_frames is a strike.
  int tail_frames = 10;
  double max_root_accel = 1.0;  // steady state: horizontal root acceleration, m/s^2
  ContactOptions contact;
};

// Cuts overlapping clips that start at steady-state left heel strikes and
// span whole gait cycles plus `tail_frames`. Clips whose last frame lacks
// future context are dropped. Returns an empty list (and logs a warning) when
// fewer than two heel strikes are found.
// Throws LengthError on sequences shorter than 4 s, ConfigError on invalid
// options.
std::vector<MotionClip> segment(const MotionSequence& seq, const SegmentOptions& options = {},
                                int first_id = 0);

// Segments every sequence and numbers the clips consecutively.
std::vector<MotionClip> build_library(std::span<const MotionSequence> sequences,
                                      const SegmentOptions& options = {});

}  // namespace ua
