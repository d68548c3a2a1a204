#include "ua/eval/reward.hpp"

#include <cmath>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

double gaussian_term(double squared_error, double sigma) {
  return std::exp(-squared_error / (sigma * sigma));
}

bool may_touch_ground(const std::string& name) {
  for (const char* part : {"ankle", "foot", "wrist", "hand"}) {
    if (name.find(part) != std::string::npos) return true;
  }
  return false;
}

struct BodyState {
  std::vector<LinkPose> world;
  std::vector<LinkPose> local;  // in the root frame
};

BodyState body_state(const KinematicModel& model, const MotionFrame& frame) {
  BodyState s;
  s.world = link_poses(model, frame.dofs, frame.root);
  const Quat inv = frame.root.orientation.conjugate();
  s.local.reserve(s.world.size());
  for (const LinkPose& p : s.world) {
    s.local.push_back({inv * (p.position - frame.root.position), inv * p.orientation});
  }
  return s;
}

}  // namespace

RewardBreakdown reward_terms(const RewardInput& in, const KinematicModel& model,
                             const RewardSigmas& sigmas, const RewardWeights& weights) {
  if (!(in.frame_dt > 0.0)) throw PreconditionError("reward frame_dt must be positive");
  const BodyState tr = body_state(model, in.tracked);
  const BodyState tr_prev = body_state(model, in.tracked_prev);
  const BodyState ref = body_state(model, in.reference);
  const BodyState ref_prev = body_state(model, in.reference_prev);

  double pos = 0.0;
  double ori = 0.0;
  double lin = 0.0;
  double ang = 0.0;
  const std::size_t links = tr.world.size();
  for (std::size_t b = 0; b < links; ++b) {
    pos += (tr.local[b].position - ref.local[b].position).squaredNorm();
    ori += rotation_log(ref.local[b].orientation.conjugate() * tr.local[b].orientation).squaredNorm();
    const Vec3 v_tr = (tr.world[b].position - tr_prev.world[b].position) / in.frame_dt;
    const Vec3 v_ref = (ref.world[b].position - ref_prev.world[b].position) / in.frame_dt;
    lin += (v_tr - v_ref).squaredNorm();
    const Vec3 w_tr =
        rotation_log(tr.world[b].orientation * tr_prev.world[b].orientation.conjugate()) / in.frame_dt;
    const Vec3 w_ref =
        rotation_log(ref.world[b].orientation * ref_prev.world[b].orientation.conjugate()) / in.frame_dt;
    ang += (w_tr - w_ref).squaredNorm();
  }
  const double n = static_cast<double>(links);

  RewardBreakdown r;
  r.root_orientation = gaussian_term(
      rotation_log(in.reference.root.orientation.conjugate() * in.tracked.root.orientation)
          .squaredNorm(),
      sigmas.root_orientation);
  r.body_position = gaussian_term(pos / n, sigmas.body_position);
  r.body_orientation = gaussian_term(ori / n, sigmas.body_orientation);
  r.body_linear_velocity = gaussian_term(lin / n, sigmas.body_linear_velocity);
  r.body_angular_velocity = gaussian_term(ang / n, sigmas.body_angular_velocity);

  for (std::size_t j = 0; j < model.num_dofs(); ++j) {
    const double d = in.action[j] - in.action_prev[j];
    r.action_rate += d * d;
    const Link& link = model.dof_link(j);
    const double q = in.tracked.dofs[j];
    if (q < link.lower_limit || q > link.upper_limit) r.joint_limit += 1.0;
  }
  for (std::size_t b = 0; b < links; ++b) {
    if (tr.world[b].position.z() < 0.0 && !may_touch_ground(model.links()[b].name)) {
      r.undesired_contacts += 1.0;
    }
  }

  r.total = weights.root_orientation * r.root_orientation + weights.body_position * r.body_position +
            weights.body_orientation * r.body_orientation +
            weights.body_linear_velocity * r.body_linear_velocity +
            weights.body_angular_velocity * r.body_angular_velocity +
            weights.action_rate * r.action_rate + weights.joint_limit * r.joint_limit +
            weights.undesired_contacts * r.undesired_contacts;
  return r;
}

}  // namespace ua
