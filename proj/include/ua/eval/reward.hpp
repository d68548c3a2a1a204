#pragma once

#include "ua/motion/kinematics.hpp"

namespace ua {

struct RewardSigmas {
  double root_orientation = 0.4;
  double body_position = 0.3;
  double body_orientation = 0.4;
  double body_linear_velocity = 1.0;
  double body_angular_velocity = 3.14;
};

struct RewardWeights {
  double root_orientation = 0.5;
  double body_position = 1.0;
  double body_orientation = 1.0;
  double body_linear_velocity = 1.0;
  double body_angular_velocity = 1.0;
  double action_rate = -0.1;
  double joint_limit = -10.0;
  double undesired_contacts = -0.1;
};

// Unweighted terms: the five tracking terms are exp(-e^2 / sigma^2) with e
// the error norm (mean squared norm over links for body terms); action_rate
// is |a_t - a_{t-1}|^2; joint_limit and undesired_contacts are counts.
struct RewardBreakdown {
  double root_orientation = 0.0;
  double body_position = 0.0;
  double body_orientation = 0.0;
  double body_linear_velocity = 0.0;
  double body_angular_velocity = 0.0;
  double action_rate = 0.0;
  double joint_limit = 0.0;
  double undesired_contacts = 0.0;
  double total = 0.0;  // weighted sum
};

struct RewardInput {
  MotionFrame tracked_prev;
  MotionFrame tracked;
  MotionFrame reference_prev;
  MotionFrame reference;
  DofVector action_prev;
  DofVector action;
  double frame_dt = 1.0 / kCanonicalFps;
};

// Body positions and orientations are compared in the root frame; link
// velocities are finite differences in the world frame. Links whose names
// contain ankle, foot, wrist or hand may touch the ground (z < 0); any other
// link below the ground counts as an undesired contact.
RewardBreakdown reward_terms(const RewardInput& input, const KinematicModel& model,
                             const RewardSigmas& sigmas = {}, const RewardWeights& weights = {});

}  // namespace ua
