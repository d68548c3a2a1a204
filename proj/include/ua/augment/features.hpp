#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "ua/motion/kinematics.hpp"

namespace ua {

struct ContactOptions {
  double height = 0.02;  // foot link z below this, m
  double speed = 0.1;    // and horizontal foot speed below this, m/s
};

inline constexpr std::array<int, 3> kFutureOffsets{20, 40, 60};

// Matching features of one frame. Everything except `root` is expressed in
// the heading frame (root position, yaw only), so the cost is invariant to
// horizontal translation and heading.
struct MatchFeature {
  RootState root;
  // Root height, root tilt (x, y of the rotation vector relative to the
  // heading frame), then left/right foot and left/right ankle positions.
  Eigen::Matrix<double, 15, 1> pose = Eigen::Matrix<double, 15, 1>::Zero();
  // Root velocity, then left/right foot velocities, m/s.
  Eigen::Matrix<double, 9, 1> velocity = Eigen::Matrix<double, 9, 1>::Zero();
  // Horizontal root positions 20, 40 and 60 frames ahead, m.
  Eigen::Matrix<double, 6, 1> trajectory = Eigen::Matrix<double, 6, 1>::Zero();
  std::array<bool, 2> contact{};  // left, right
  double phase = 0.0;             // [0, 1), restarts at left heel strikes

  bool operator==(const MatchFeature&) const = default;
};

// Per-frame kinematics of a whole sequence: FK of the feet and ankles,
// contacts and left heel strikes (rising edges of left contact).
class SequenceFeatures {
 public:
  SequenceFeatures(const MotionSequence& seq, const ContactOptions& contact = {},
                   const KinematicModel& model = KinematicModel::g1());

  std::size_t size() const { return seq_.size(); }
  const MotionSequence& sequence() const { return seq_; }
  // Throws RangeError unless index + 60 < size().
  MatchFeature at(std::size_t index) const;
  bool has_features(std::size_t index) const;
  const std::vector<std::size_t>& left_strikes() const { return strikes_; }
  bool contact(std::size_t index, int foot) const;
  double phase(std::size_t index) const;
  const Vec3& foot_position(std::size_t index, int foot) const;

 private:
  MotionSequence seq_;
  std::vector<std::array<Vec3, 4>> points_;  // left foot, right foot, left ankle, right ankle
  std::vector<std::array<bool, 2>> contact_;
  std::vector<std::size_t> strikes_;
};

MatchFeature extract_features(const MotionSequence& seq, std::size_t index,
                              const ContactOptions& contact = {});

struct MatchWeights {
  double pose = 1.0;
  double velocity = 1.0;
  double trajectory = 2.0;
  double contact = 0.5;
};

// Weighted sum of the pose, velocity and trajectory distances plus the
// contact weight times the number of mismatched contacts.
// Throws PreconditionError on a negative weight.
double match_cost(const MatchFeature& current, const MatchFeature& candidate,
                  const MatchWeights& weights = {});

}  // namespace ua
