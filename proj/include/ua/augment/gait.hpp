#pragma once

#include <cstdint>

#include "ua/motion/motion.hpp"

namespace ua {

// Procedural walking: feet follow planted-stance / lifted-swing paths and the
// legs are solved with planar two-link IK, so stance feet stay fixed on the
// ground. Speed and turn rate vary smoothly between randomly drawn targets.
struct GaitOptions {
  double duration_s = 60.0;
  double fps = kCanonicalFps;
  double period_s = 1.0;  // full gait cycle; the left heel strikes at t = k * period
  double duty = 0.6;      // stance fraction per foot
  double min_speed = 0.8;  // m/s
  double max_speed = 1.2;
  double max_turn_rate_deg = 15.0;  // deg/s
  double segment_s = 6.0;           // seconds between speed/turn targets
  double step_height = 0.08;        // m
  std::uint64_t seed = 3;
};

// Throws ConfigError on non-positive durations, a duty outside (0, 1), or a
// speed range the legs cannot reach.
MotionSequence synthetic_gait(const GaitOptions& options);

}  // namespace ua
