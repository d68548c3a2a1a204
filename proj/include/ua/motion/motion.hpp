#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ua/motion/rotation.hpp"

namespace ua {

inline constexpr std::size_t kNumDofs = 29;
inline constexpr double kCanonicalFps = 50.0;

// Joint angles in radians, one per actuated degree of freedom.
struct DofVector {
  std::array<double, kNumDofs> q{};

  double& operator[](std::size_t i) { return q[i]; }
  double operator[](std::size_t i) const { return q[i]; }
  bool all_finite() const;
  bool operator==(const DofVector&) const = default;
};

struct RootState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

struct MotionFrame {
  RootState root;
  DofVector dofs;
};

bool operator==(const RootState& a, const RootState& b);
bool operator==(const MotionFrame& a, const MotionFrame& b);

// An fps-stamped, non-empty list of frames. Immutable after construction.
class MotionSequence {
 public:
  // Throws PreconditionError if fps <= 0, frames is empty, a DOF value is
  // non-finite, or an orientation is not unit within 1e-9.
  MotionSequence(double fps, std::vector<MotionFrame> frames);

  double fps() const { return fps_; }
  std::size_t size() const { return frames_.size(); }
  double duration() const { return static_cast<double>(frames_.size() - 1) / fps_; }
  const MotionFrame& operator[](std::size_t i) const { return frames_[i]; }
  std::span<const MotionFrame> frames() const { return frames_; }

  // Frame range [begin, end) as a new sequence.
  MotionSequence slice(std::size_t begin, std::size_t end) const;

  bool operator==(const MotionSequence&) const = default;

 private:
  double fps_;
  std::vector<MotionFrame> frames_;
};

// 29 x N matrix of joint angles, one column per frame.
Eigen::MatrixXd dof_matrix(const MotionSequence& seq);

// Builds a sequence from a 29 x N joint matrix, taking root states from
// `roots` (cycled if shorter) or identity when empty.
MotionSequence from_dof_matrix(const Eigen::MatrixXd& dofs, double fps,
                               std::span<const RootState> roots = {});

// Linear interpolation per DOF and root position, spherical interpolation for
// orientation. A frame whose time coincides with a source sample is copied
// exactly.
MotionSequence resample(const MotionSequence& seq, double target_fps);

}  // namespace ua
