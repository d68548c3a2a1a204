#include "ua/motion/motion.hpp"

#include <cmath>

#include "ua/common/errors.hpp"

namespace ua {

bool DofVector::all_finite() const {
  for (double v : q) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool operator==(const RootState& a, const RootState& b) {
  return a.position == b.position && a.orientation.coeffs() == b.orientation.coeffs();
}

bool operator==(const MotionFrame& a, const MotionFrame& b) {
  return a.root == b.root && a.dofs == b.dofs;
}

MotionSequence::MotionSequence(double fps, std::vector<MotionFrame> frames)
    : fps_(fps), frames_(std::move(frames)) {
  if (!(fps_ > 0.0) || !std::isfinite(fps_)) {
    throw PreconditionError("motion sequence fps must be positive");
  }
  if (frames_.empty()) throw PreconditionError("motion sequence needs at least one frame");
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    if (!f.dofs.all_finite()) {
      throw PreconditionError("non-finite joint angle in frame " + std::to_string(i));
    }
    if (!f.root.position.allFinite()) {
      throw PreconditionError("non-finite root position in frame " + std::to_string(i));
    }
    if (std::abs(f.root.orientation.norm() - 1.0) > 1e-9) {
      throw PreconditionError("root orientation is not unit in frame " + std::to_string(i));
    }
  }
}

MotionSequence MotionSequence::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > frames_.size()) throw RangeError("invalid frame slice");
  return MotionSequence(fps_, std::vector<MotionFrame>(frames_.begin() + static_cast<std::ptrdiff_t>(begin),
                                                       frames_.begin() + static_cast<std::ptrdiff_t>(end)));
}

Eigen::MatrixXd dof_matrix(const MotionSequence& seq) {
  Eigen::MatrixXd m(kNumDofs, seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (std::size_t d = 0; d < kNumDofs; ++d) m(d, t) = seq[t].dofs[d];
  }
  return m;
}

MotionSequence from_dof_matrix(const Eigen::MatrixXd& dofs, double fps,
                               std::span<const RootState> roots) {
  if (dofs.rows() != static_cast<Eigen::Index>(kNumDofs)) {
    throw DimensionError("joint matrix must have 29 rows");
  }
  std::vector<MotionFrame> frames(static_cast<std::size_t>(dofs.cols()));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t d = 0; d < kNumDofs; ++d) {
      frames[t].dofs[d] = dofs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(t));
    }
    if (!roots.empty()) frames[t].root = roots[t % roots.size()];
  }
  return MotionSequence(fps, std::move(frames));
}

MotionSequence resample(const MotionSequence& seq, double target_fps) {
  if (!(target_fps > 0.0)) throw PreconditionError("target fps must be positive");
  if (target_fps == seq.fps()) return seq;
  const std::size_t n = seq.size();
  const double ratio = seq.fps() / target_fps;
  const auto count = static_cast<std::size_t>(
      std::floor(static_cast<double>(n - 1) / ratio + 1e-9)) + 1;
  std::vector<MotionFrame> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double pos = static_cast<double>(k) * seq.fps() / target_fps;
    auto i0 = static_cast<std::size_t>(std::floor(pos));
    if (i0 >= n - 1) {
      out[k] = seq[n - 1];
      continue;
    }
    const double a = pos - static_cast<double>(i0);
    if (a == 0.0) {
      out[k] = seq[i0];
      continue;
    }
    const MotionFrame& f0 = seq[i0];
    const MotionFrame& f1 = seq[i0 + 1];
    MotionFrame& f = out[k];
    for (std::size_t d = 0; d < kNumDofs; ++d) {
      f.dofs[d] = f0.dofs[d] + a * (f1.dofs[d] - f0.dofs[d]);
    }
    f.root.position = f0.root.position + a * (f1.root.position - f0.root.position);
    f.root.orientation = slerp(f0.root.orientation, f1.root.orientation, a);
  }
  return MotionSequence(target_fps, std::move(out));
}

}  // namespace ua
