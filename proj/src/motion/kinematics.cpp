#include "ua/motion/kinematics.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

namespace detail {
extern const char* const kG1ModelText;
}

KinematicModel::KinematicModel(std::vector<Link> links, std::size_t num_dofs)
    : links_(std::move(links)), dof_links_(num_dofs, links_.size()) {
  if (links_.empty()) throw StructuralError("kinematic model has no links");
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.parent >= static_cast<int>(i) || l.parent < -1) {
      throw StructuralError(
          fmt::format("link '{}' has parent {} not preceding it (cyclic or unsorted)", l.name,
                      l.parent));
    }
    if (l.dof) {
      const int d = *l.dof;
      if (d < 0 || static_cast<std::size_t>(d) >= num_dofs) {
        throw StructuralError(fmt::format("link '{}' drives out-of-range DOF {}", l.name, d));
      }
      if (dof_links_[static_cast<std::size_t>(d)] != links_.size()) {
        throw StructuralError(fmt::format("DOF {} is driven by two links", d));
      }
      if (std::abs(l.axis.norm() - 1.0) > 1e-9) {
        throw StructuralError(fmt::format("link '{}' has a non-unit axis", l.name));
      }
      dof_links_[static_cast<std::size_t>(d)] = i;
    }
  }
  for (std::size_t d = 0; d < num_dofs; ++d) {
    if (dof_links_[d] == links_.size()) {
      throw StructuralError(fmt::format("DOF {} is not driven by any link", d));
    }
  }
}

KinematicModel KinematicModel::parse(std::istream& in) {
  std::vector<Link> links;
  std::unordered_map<std::string, int> index;
  std::string line;
  int max_dof = -1;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto tok = text_io::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 13) {
      throw ParseError(fmt::format("model line needs 13 fields, got {}: '{}'", tok.size(), line));
    }
    Link l;
    l.name = std::string(tok[0]);
    if (tok[1] != "-") {
      auto it = index.find(std::string(tok[1]));
      if (it == index.end()) {
        throw StructuralError(
            fmt::format("link '{}' references unknown or later parent '{}'", l.name, tok[1]));
      }
      l.parent = it->second;
    }
    l.offset = Vec3(text_io::parse_double(tok[2]), text_io::parse_double(tok[3]),
                    text_io::parse_double(tok[4]));
    l.axis = Vec3(text_io::parse_double(tok[5]), text_io::parse_double(tok[6]),
                  text_io::parse_double(tok[7]));
    if (tok[8] != "-") {
      l.dof = static_cast<int>(text_io::parse_int(tok[8]));
      max_dof = std::max(max_dof, *l.dof);
    }
    if (tok[9] == "upper") {
      l.part = BodyPart::kUpper;
    } else if (tok[9] == "lower") {
      l.part = BodyPart::kLower;
    } else {
      throw ParseError(fmt::format("unknown body part '{}'", tok[9]));
    }
    if (tok[10] != "-") l.lower_limit = text_io::parse_double(tok[10]);
    if (tok[11] != "-") l.upper_limit = text_io::parse_double(tok[11]);
    if (tok[12] != "-") l.inertia = text_io::parse_double(tok[12]);
    if (index.contains(l.name)) throw StructuralError("duplicate link name '" + l.name + "'");
    index[l.name] = static_cast<int>(links.size());
    links.push_back(std::move(l));
  }
  return KinematicModel(std::move(links), static_cast<std::size_t>(max_dof + 1));
}

KinematicModel KinematicModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open kinematic model: " + path);
  return parse(in);
}

const KinematicModel& KinematicModel::g1() {
  static const KinematicModel model = [] {
    std::istringstream in(detail::kG1ModelText);
    return parse(in);
  }();
  return model;
}

std::optional<std::size_t> KinematicModel::find(std::string_view name) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<LinkPose> link_poses(const KinematicModel& model, const DofVector& pose,
                                 const RootState& root) {
  const auto& links = model.links();
  std::vector<LinkPose> out(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    const Vec3& parent_pos = l.parent < 0 ? root.position : out[l.parent].position;
    const Quat& parent_rot = l.parent < 0 ? root.orientation : out[l.parent].orientation;
    out[i].position = parent_pos + parent_rot * l.offset;
    if (l.dof) {
      const double angle = *l.dof < static_cast<int>(kNumDofs) ? pose[*l.dof] : 0.0;
      out[i].orientation = parent_rot * Quat(Eigen::AngleAxisd(angle, l.axis));
    } else {
      out[i].orientation = parent_rot;
    }
  }
  return out;
}

std::vector<Vec3> forward_kinematics(const KinematicModel& model, const DofVector& pose,
                                     const RootState& root) {
  auto poses = link_poses(model, pose, root);
  std::vector<Vec3> out;
  out.reserve(poses.size());
  for (const auto& p : poses) out.push_back(p.position);
  return out;
}

double mpjpe(const MotionSequence& a, const MotionSequence& b, const KinematicModel& model) {
  if (a.size() != b.size() || a.fps() != b.fps()) {
    throw DimensionError(fmt::format("mpjpe needs matching sequences ({}@{} vs {}@{})", a.size(),
                                     a.fps(), b.size(), b.fps()));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    auto pa = forward_kinematics(model, a[t].dofs, a[t].root);
    auto pb = forward_kinematics(model, b[t].dofs, b[t].root);
    for (std::size_t i = 0; i < pa.size(); ++i) sum += (pa[i] - pb[i]).norm();
  }
  return 100.0 * sum / static_cast<double>(a.size() * model.num_links());
}

}  // namespace ua
