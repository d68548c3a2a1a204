#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "ua/augment/matching.hpp"
#include "ua/augment/segment.hpp"
#include "ua/common/errors.hpp"

namespace ua {

// Blends the first `blend_frames` frames of two time-aligned windows: the
// weight runs from 0 to 1 with a cubic ease (zero slope at both ends), DOFs
// and root position interpolate along it and root orientation uses slerp.
// Output frame 0 is tail[0] and the last output frame is head[blend_frames-1],
// both bit-exact. Throws PreconditionError if either side is shorter than
// blend_frames or blend_frames < 2.
std::vector<MotionFrame> blend(std::span<const MotionFrame> tail, std::span<const MotionFrame> head,
                               int blend_frames = 10);

// Applies the horizontal rigid transform (yaw about z, then x/y translation)
// that moves `from` onto `to`'s position and heading. DOFs and heights are
// unchanged.
std::vector<MotionFrame> reanchor(std::span<const MotionFrame> frames, const RootState& from,
                                  const RootState& to);

struct SynthesisOptions {
  double duration_s = 60.0;
  int blend_frames = 10;
  MatchWeights weights;
  ContactOptions contact;
  std::size_t history_capacity = 16;
  double penalty_weight = 1.0;
  // A clip may not be chosen again within this many selections.
  std::size_t reuse_window = 8;
  double temperature = 1.0;
  double max_dof_delta = 0.3;  // rad per frame
  double max_root_jump = 0.05;  // m per frame
  // Optional desired root path (one point per output frame). When set, the
  // trajectory term compares against it instead of the clip's own future.
  std::vector<Vec3> target_path;
  std::uint64_t seed = 0;

  // Throws ConfigError on non-positive duration, blend_frames < 2,
  // reuse_window > history_capacity, or non-positive bounds.
  void validate() const;
};

struct TransitionQc {
  std::size_t output_frame = 0;  // first blended frame
  int from_clip = 0;
  int to_clip = 0;
  double cost = 0.0;
  double foot_slide = 0.0;  // max horizontal speed of a grounded foot in the blend, m/s
  double max_dof_delta = 0.0;
  double max_root_jump = 0.0;
  std::size_t rejected = 0;  // candidates filtered before this one was accepted
};

struct QcReport {
  std::vector<TransitionQc> transitions;
  std::size_t filtered = 0;
  double max_dof_delta = 0.0;
  double max_root_jump = 0.0;
  double mean_foot_slide = 0.0;
  std::size_t dof_violations = 0;
  std::size_t root_violations = 0;
  std::size_t reuse_violations = 0;
  std::size_t non_finite_frames = 0;

  std::size_t violations() const {
    return dof_violations + root_violations + reuse_violations + non_finite_frames;
  }
};

struct SynthesisResult {
  MotionSequence motion;
  std::vector<int> clips;  // chosen clip ids in order
  QcReport qc;
};

class SynthesisError : public GenerationError {
 public:
  SynthesisError(const std::string& what, std::shared_ptr<const MotionSequence> partial)
      : GenerationError(what), partial_(std::move(partial)) {}
  const MotionSequence& partial() const { return *partial_; }

 private:
  std::shared_ptr<const MotionSequence> partial_;
};

// Chains library clips by motion matching until the requested duration is
// reached. Each transition matches the current clip's frame
// size() - blend_frames (a heel strike) against every clip's first frame,
// re-anchors the chosen clip onto it and blends the overlap. Transitions that
// would break a QC bound are filtered and the next candidate is drawn.
// Throws PreconditionError on an empty or inconsistent library and
// SynthesisError (with the output so far) when every candidate is filtered.
SynthesisResult synthesize(std::span<const MotionClip> library, const SynthesisOptions& options);

// Recomputes the whole-sequence QC figures of `result.qc` from its motion.
void audit(SynthesisResult& result, const SynthesisOptions& options);

// `key value` summary lines, then one `transition ...` line per transition.
void write_qc_report(std::ostream& out, const QcReport& qc);

}  // namespace ua
