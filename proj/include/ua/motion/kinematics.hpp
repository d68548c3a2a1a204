#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ua/motion/motion.hpp"

namespace ua {

enum class BodyPart { kUpper, kLower };

struct Link {
  std::string name;
  int parent = -1;  // -1 for the floating base
  Vec3 offset = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  std::optional<int> dof;  // driven DOF index, none for fixed links
  BodyPart part = BodyPart::kLower;
  double lower_limit = -1e9;
  double upper_limit = 1e9;
  double inertia = 1.0;  // reflected inertia of the driving actuator
};

struct LinkPose {
  Vec3 position;
  Quat orientation;
};

// A topologically sorted kinematic tree. A link's frame is its parent's frame
// translated by `offset` and then rotated about `axis` by its DOF angle; the
// link's position is the frame origin.
class KinematicModel {
 public:
  // Throws StructuralError on a parent index that is not earlier in the list
  // (this covers cycles), a DOF set that is not exactly {0..dofs-1}, or a
  // non-unit axis on a driven link.
  explicit KinematicModel(std::vector<Link> links, std::size_t num_dofs = kNumDofs);

  // Parses the text model format (see data/g1_29dof.model).
  static KinematicModel parse(std::istream& in);
  static KinematicModel load(const std::string& path);
  // The bundled G1-like 29-DOF model.
  static const KinematicModel& g1();

  const std::vector<Link>& links() const { return links_; }
  std::size_t num_links() const { return links_.size(); }
  std::size_t num_dofs() const { return dof_links_.size(); }
  const Link& dof_link(std::size_t dof) const { return links_[dof_links_[dof]]; }
  BodyPart part_of_dof(std::size_t dof) const { return dof_link(dof).part; }
  // Index of the link called `name`, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<Link> links_;
  std::vector<std::size_t> dof_links_;
};

// World-frame pose of every link.
std::vector<LinkPose> link_poses(const KinematicModel& model, const DofVector& pose,
                                 const RootState& root);

// World-frame position of every link, meters.
std::vector<Vec3> forward_kinematics(const KinematicModel& model, const DofVector& pose,
                                     const RootState& root);

// Mean per-link position error in centimeters. Throws DimensionError when the
// sequences differ in length or fps.
double mpjpe(const MotionSequence& a, const MotionSequence& b, const KinematicModel& model);

// Per frame: lower-body DOFs and the root from `lower_source`, upper-body DOFs
// from `upper_source`. The output has the length of the shorter input.
MotionSequence compose_cross_modal(const MotionSequence& upper_source,
                                   const MotionSequence& lower_source,
                                   const KinematicModel& model);

}  // namespace ua
