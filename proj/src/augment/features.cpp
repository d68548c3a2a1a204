#include "ua/augment/features.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

std::size_t link_index(const KinematicModel& model, std::string_view name) {
  const auto i = model.find(name);
  if (!i) throw StructuralError(fmt::format("model lacks link '{}'", name));
  return *i;
}

Quat heading_frame(const RootState& root) { return yaw_quat(heading_of(root.orientation)); }

}  // namespace

SequenceFeatures::SequenceFeatures(const MotionSequence& seq, const ContactOptions& contact,
                                   const KinematicModel& model)
    : seq_(seq) {
  const std::array<std::size_t, 4> links{
      link_index(model, "left_foot"), link_index(model, "right_foot"),
      link_index(model, "left_ankle_roll_link"), link_index(model, "right_ankle_roll_link")};
  points_.reserve(seq.size());
  for (const MotionFrame& f : seq.frames()) {
    const std::vector<Vec3> p = forward_kinematics(model, f.dofs, f.root);
    points_.push_back({p[links[0]], p[links[1]], p[links[2]], p[links[3]]});
  }
  contact_.resize(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::size_t prev = i == 0 ? std::min<std::size_t>(1, seq.size() - 1) : i - 1;
    for (int foot = 0; foot < 2; ++foot) {
      const Vec3& a = points_[i][foot];
      const Vec3& b = points_[prev][foot];
      const double speed = (a - b).head<2>().norm() * seq.fps();
      contact_[i][foot] = a.z() < contact.height && speed < contact.speed;
    }
    if (i > 0 && contact_[i][0] && !contact_[i - 1][0]) strikes_.push_back(i);
  }
}

bool SequenceFeatures::contact(std::size_t index, int foot) const { return contact_.at(index)[foot]; }

const Vec3& SequenceFeatures::foot_position(std::size_t index, int foot) const {
  return points_.at(index)[foot];
}

double SequenceFeatures::phase(std::size_t index) const {
  if (strikes_.size() < 2) return 0.0;
  const auto i = static_cast<double>(index);
  auto wrap = [](double x) { return x - std::floor(x); };
  if (index < strikes_.front()) {
    const double period = static_cast<double>(strikes_[1] - strikes_[0]);
    return wrap((i - static_cast<double>(strikes_[0])) / period);
  }
  for (std::size_t k = 0; k + 1 < strikes_.size(); ++k) {
    if (index < strikes_[k + 1]) {
      return (i - static_cast<double>(strikes_[k])) / static_cast<double>(strikes_[k + 1] - strikes_[k]);
    }
  }
  const std::size_t n = strikes_.size();
  const double period = static_cast<double>(strikes_[n - 1] - strikes_[n - 2]);
  return wrap((i - static_cast<double>(strikes_[n - 1])) / period);
}

bool SequenceFeatures::has_features(std::size_t index) const {
  return index + static_cast<std::size_t>(kFutureOffsets.back()) < seq_.size();
}

MatchFeature SequenceFeatures::at(std::size_t index) const {
  if (!has_features(index)) {
    throw RangeError(fmt::format("frame {} needs {} future frames, sequence has {}", index,
                                 kFutureOffsets.back(), seq_.size()));
  }
  const MotionFrame& f = seq_[index];
  const Quat inv = heading_frame(f.root).conjugate();
  const std::size_t prev = index == 0 ? 1 : index - 1;
  const double sign = index == 0 ? -1.0 : 1.0;  // forward difference at the first frame
  const double fps = seq_.fps();

  MatchFeature m;
  m.root = f.root;
  const Vec3 tilt = rotation_log(inv * f.root.orientation);
  m.pose(0) = f.root.position.z();
  m.pose(1) = tilt.x();
  m.pose(2) = tilt.y();
  for (int k = 0; k < 4; ++k) {
    m.pose.segment<3>(3 + 3 * k) = inv * (points_[index][k] - f.root.position);
  }
  m.velocity.segment<3>(0) = sign * fps * (inv * (f.root.position - seq_[prev].root.position));
  for (int k = 0; k < 2; ++k) {
    m.velocity.segment<3>(3 + 3 * k) = sign * fps * (inv * (points_[index][k] - points_[prev][k]));
  }
  for (std::size_t k = 0; k < kFutureOffsets.size(); ++k) {
    const Vec3& p = seq_[index + static_cast<std::size_t>(kFutureOffsets[k])].root.position;
    m.trajectory.segment<2>(2 * static_cast<Eigen::Index>(k)) = (inv * (p - f.root.position)).head<2>();
  }
  m.contact = contact_[index];
  m.phase = phase(index);
  return m;
}

MatchFeature extract_features(const MotionSequence& seq, std::size_t index,
                              const ContactOptions& contact) {
  if (index + static_cast<std::size_t>(kFutureOffsets.back()) >= seq.size()) {
    throw RangeError(fmt::format("frame {} needs {} future frames, sequence has {}", index,
                                 kFutureOffsets.back(), seq.size()));
  }
  return SequenceFeatures(seq, contact).at(index);
}

double match_cost(const MatchFeature& a, const MatchFeature& b, const MatchWeights& w) {
  if (w.pose < 0.0 || w.velocity < 0.0 || w.trajectory < 0.0 || w.contact < 0.0) {
    throw PreconditionError("match weights must be non-negative");
  }
  double mismatches = 0.0;
  for (int k = 0; k < 2; ++k) mismatches += a.contact[k] != b.contact[k] ? 1.0 : 0.0;
  return w.pose * (a.pose - b.pose).norm() + w.velocity * (a.velocity - b.velocity).norm() +
         w.trajectory * (a.trajectory - b.trajectory).norm() + w.contact * mismatches;
}

}  // namespace ua
