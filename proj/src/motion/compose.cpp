#include "ua/common/errors.hpp"
#include "ua/motion/kinematics.hpp"

namespace ua {

MotionSequence compose_cross_modal(const MotionSequence& upper_source,
                                   const MotionSequence& lower_source,
                                   const KinematicModel& model) {
  if (upper_source.fps() != lower_source.fps()) {
    throw PreconditionError("cross-modal composition needs equal frame rates");
  }
  if (model.num_dofs() != kNumDofs) throw DimensionError("model must drive 29 DOFs");
  const std::size_t n = std::min(upper_source.size(), lower_source.size());
  std::vector<MotionFrame> frames(n);
  for (std::size_t t = 0; t < n; ++t) {
    // The pelvis (root) belongs to the lower body.
    frames[t].root = lower_source[t].root;
    for (std::size_t d = 0; d < kNumDofs; ++d) {
      frames[t].dofs[d] = model.part_of_dof(d) == BodyPart::kUpper ? upper_source[t].dofs[d]
                                                                  : lower_source[t].dofs[d];
    }
  }
  return MotionSequence(lower_source.fps(), std::move(frames));
}

}  // namespace ua
