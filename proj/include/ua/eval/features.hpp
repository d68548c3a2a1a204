#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "ua/motion/motion.hpp"

namespace ua {

using FeatureVector = Eigen::VectorXd;

// Layout: per-DOF mean (29), per-DOF std (29), per-DOF mean |velocity| in
// rad/s (29), then mean and std of root speed in m/s.
inline constexpr Eigen::Index kFeatureWidth = 3 * static_cast<Eigen::Index>(kNumDofs) + 2;

// Deterministic handcrafted embedding. Every statistic is computed over
// sorted samples, so reversing time yields the identical vector.
// Throws LengthError on a single-frame sequence.
FeatureVector motion_features(const MotionSequence& seq);

std::vector<FeatureVector> motion_features(std::span<const MotionSequence> seqs);

}  // namespace ua
