#include "ua/augment/gait.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"

namespace ua {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kThigh = 0.3;
constexpr double kShin = 0.3;
constexpr double kFootDrop = 0.05;  // ankle roll link to foot link
constexpr double kHipDrop = 0.1;    // pelvis to hip joints
constexpr double kHipWidth = 0.1;
constexpr double kPelvisHeight = 0.58;
constexpr double kBob = 0.005;

// DOF indices of the bundled model.
enum Dof : std::size_t {
  kLeftHipPitch = 0,
  kRightHipPitch = 6,
  kWaistYaw = 12,
  kLeftShoulderPitch = 15,
  kLeftShoulderRoll = 16,
  kLeftElbow = 18,
  kRightShoulderPitch = 22,
  kRightShoulderRoll = 23,
  kRightElbow = 25,
};

double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

// Root path sampled per frame, with `margin` extra frames on both sides.
struct Path {
  long margin = 0;
  std::vector<Vec3> pos;
  std::vector<double> yaw;
  std::vector<double> speed;

  double fidx(double t, double fps) const { return t * fps + static_cast<double>(margin); }

  template <class T>
  T lerp(const std::vector<T>& v, double f) const {
    const double c = std::clamp(f, 0.0, static_cast<double>(v.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(c), v.size() - 2);
    const double a = c - static_cast<double>(i);
    return v[i] + a * (v[i + 1] - v[i]);
  }
};

Path make_path(const GaitOptions& o, std::size_t frames) {
  Rng rng = make_rng(o.seed, 1);
  const double dt = 1.0 / o.fps;
  const auto seg_frames = std::max<long>(1, std::lround(o.segment_s * o.fps));
  const double max_turn = o.max_turn_rate_deg * kPi / 180.0;
  auto draw_speed = [&] { return o.min_speed + uniform01(rng) * (o.max_speed - o.min_speed); };
  auto draw_turn = [&] { return (2.0 * uniform01(rng) - 1.0) * max_turn; };

  Path p;
  p.margin = static_cast<long>(std::ceil(3.0 * o.period_s * o.fps)) + 2;
  const auto total = static_cast<long>(frames) + 2 * p.margin;
  std::vector<double> omega(static_cast<std::size_t>(total));
  p.speed.resize(static_cast<std::size_t>(total));
  double v0 = draw_speed();
  double w0 = 0.0;
  double v1 = draw_speed();
  double w1 = draw_turn();
  for (long f = 0; f < total; ++f) {
    const long k = f - p.margin;
    if (k < 0) {
      p.speed[static_cast<std::size_t>(f)] = v0;
      omega[static_cast<std::size_t>(f)] = w0;
      continue;
    }
    if (k > 0 && k % seg_frames == 0) {
      v0 = v1;
      w0 = w1;
      v1 = draw_speed();
      w1 = draw_turn();
    }
    const double u = 0.5 - 0.5 * std::cos(kPi * static_cast<double>(k % seg_frames) / seg_frames);
    p.speed[static_cast<std::size_t>(f)] = v0 + u * (v1 - v0);
    omega[static_cast<std::size_t>(f)] = w0 + u * (w1 - w0);
  }
  p.pos.assign(static_cast<std::size_t>(total), Vec3::Zero());
  p.yaw.assign(static_cast<std::size_t>(total), 0.0);
  const auto m = static_cast<std::size_t>(p.margin);
  p.pos[m] = Vec3(0.0, 0.0, kPelvisHeight);
  for (std::size_t f = m + 1; f < p.pos.size(); ++f) {
    p.yaw[f] = p.yaw[f - 1] + omega[f - 1] * dt;
    p.pos[f] = p.pos[f - 1] + p.speed[f - 1] * dt * Vec3(std::cos(p.yaw[f - 1]), std::sin(p.yaw[f - 1]), 0.0);
  }
  for (std::size_t f = m; f-- > 0;) {
    p.yaw[f] = p.yaw[f + 1] - omega[f] * dt;
    p.pos[f] = p.pos[f + 1] - p.speed[f] * dt * Vec3(std::cos(p.yaw[f]), std::sin(p.yaw[f]), 0.0);
  }
  return p;
}

// Planted position of a foot (ankle-roll link height) for the stance that
// begins at time t_strike.
Vec3 stance_point(const Path& path, const GaitOptions& o, double t_strike, double side) {
  const double f = path.fidx(t_strike, o.fps);
  const Vec3 root = path.lerp(path.pos, f);
  const double yaw = path.lerp(path.yaw, f);
  const double reach = 0.5 * path.lerp(path.speed, f) * o.period_s * o.duty;
  const Vec3 local(reach, side * kHipWidth, 0.0);
  Vec3 p = Vec3(root.x(), root.y(), 0.0) + yaw_quat(yaw) * local;
  p.z() = kFootDrop;
  return p;
}

// World target of the ankle-roll link at time t for a foot whose stance
// starts at phase offset `offset` of the cycle.
Vec3 ankle_target(const Path& path, const GaitOptions& o, double t, double offset, double side) {
  const double cycles = t / o.period_s + offset;
  const double c = std::floor(cycles);
  const double phase = cycles - c;
  const double t_strike = (c - offset) * o.period_s;
  const Vec3 planted = stance_point(path, o, t_strike, side);
  if (phase < o.duty) return planted;
  const Vec3 next = stance_point(path, o, t_strike + o.period_s, side);
  const double u = (phase - o.duty) / (1.0 - o.duty);
  Vec3 p = planted + smooth(u) * (next - planted);
  const double lift = std::sin(kPi * u);
  p.z() = kFootDrop + o.step_height * lift * lift;
  return p;
}

struct LegAngles {
  double hip_pitch, hip_roll, knee, ankle_pitch, ankle_roll;
};

// Solves hip pitch/roll and knee so the ankle reaches `d` (hip to ankle, in
// the pelvis frame); the ankle cancels pitch and roll to keep the foot level.
LegAngles solve_leg(const Vec3& d) {
  const double reach = kThigh + kShin;
  const double dist = std::min(d.norm(), reach - 1e-6);
  const double cos_knee = (dist * dist - kThigh * kThigh - kShin * kShin) / (2.0 * kThigh * kShin);
  const double knee = std::acos(std::clamp(cos_knee, -1.0, 1.0));
  // Leg vector in the hip-roll frame: (-l2 sin k, 0, -(l1 + l2 cos k)).
  const double lx = -kShin * std::sin(knee);
  const double lz = -(kThigh + kShin * std::cos(knee));
  const double roll = std::asin(std::clamp(d.y() / -lz, -1.0, 1.0));
  const double lz_rolled = lz * std::cos(roll);
  const double pitch = wrap_angle(std::atan2(d.x(), d.z()) - std::atan2(lx, lz_rolled));
  return {pitch, roll, knee, -(pitch + knee), -roll};
}

}  // namespace

MotionSequence synthetic_gait(const GaitOptions& o) {
  if (!(o.duration_s > 0.0) || !(o.fps > 0.0) || !(o.period_s > 0.0) || !(o.segment_s > 0.0)) {
    throw ConfigError("gait durations and rates must be positive");
  }
  if (!(o.duty > 0.0 && o.duty < 1.0)) throw ConfigError("gait duty must lie in (0, 1)");
  if (!(o.min_speed >= 0.0) || o.max_speed < o.min_speed) throw ConfigError("invalid gait speed range");
  const double half_stance = 0.5 * o.max_speed * o.period_s * o.duty;
  const double leg_drop = kPelvisHeight + kBob - kHipDrop - kFootDrop;
  if (std::hypot(half_stance, leg_drop) >= kThigh + kShin) {
    throw ConfigError(fmt::format("max speed {} m/s needs a stance longer than the legs reach",
                                  o.max_speed));
  }

  const auto frames = static_cast<std::size_t>(std::lround(o.duration_s * o.fps)) + 1;
  const Path path = make_path(o, frames);
  std::vector<MotionFrame> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / o.fps;
    const auto f = static_cast<std::size_t>(path.margin) + i;
    const double cycle = 2.0 * kPi * t / o.period_s;
    MotionFrame& frame = out[i];
    frame.root.position = path.pos[f];
    frame.root.position.z() = kPelvisHeight + kBob * std::cos(2.0 * cycle);
    frame.root.orientation = yaw_quat(path.yaw[f]);

    const Quat inv = frame.root.orientation.conjugate();
    for (auto [base, offset, side] : {std::tuple{kLeftHipPitch, 0.0, 1.0},
                                      std::tuple{kRightHipPitch, 0.5, -1.0}}) {
      const Vec3 target = ankle_target(path, o, t, offset, side);
      const Vec3 hip(0.0, side * kHipWidth, -kHipDrop);
      const LegAngles a = solve_leg(inv * (target - frame.root.position) - hip);
      frame.dofs[base + 0] = a.hip_pitch;
      frame.dofs[base + 1] = a.hip_roll;
      frame.dofs[base + 2] = 0.0;
      frame.dofs[base + 3] = a.knee;
      frame.dofs[base + 4] = a.ankle_pitch;
      frame.dofs[base + 5] = a.ankle_roll;
    }
    frame.dofs[kWaistYaw] = 0.08 * std::sin(cycle);
    frame.dofs[kLeftShoulderPitch] = 0.3 * std::cos(cycle);
    frame.dofs[kRightShoulderPitch] = -0.3 * std::cos(cycle);
    frame.dofs[kLeftShoulderRoll] = 0.15;
    frame.dofs[kRightShoulderRoll] = -0.15;
    frame.dofs[kLeftElbow] = 0.4 + 0.1 * std::cos(cycle);
    frame.dofs[kRightElbow] = 0.4 - 0.1 * std::cos(cycle);
  }
  return MotionSequence(o.fps, std::move(out));
}

}  // namespace ua
