#include "ua/tokenize/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kStillEpsilon = 1e-9;  // meters
// Heading changes this small are rounding noise and count as straight, so
// straight paths stay in bin 30 under any rigid transform.
constexpr double kStraightEpsilon = 1e-9;  // radians

}  // namespace

Vec3 root_displacement(const Vec3& p, const Vec3& p_prev, const Mat3& r_prev) {
  return r_prev.transpose() * (p - p_prev);
}

int heading_bin(double delta_deg) {
  const int bin = static_cast<int>(std::floor((delta_deg + 180.0) / 6.0));
  return std::clamp(bin, 0, kTrajectoryBins - 1);
}

std::vector<TokenId> tokenize_trajectory(const std::vector<RootState>& roots, double fps) {
  if (roots.empty()) throw PreconditionError("trajectory has no samples");
  std::vector<MotionFrame> frames(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) frames[i].root = roots[i];
  const MotionSequence path = resample(MotionSequence(fps, std::move(frames)), kTrajectoryFps);
  if (path.size() < 2) {
    throw PreconditionError("trajectory needs at least two samples at 5 FPS");
  }

  std::vector<TokenId> tokens;
  tokens.reserve(path.size() - 1);
  double prev_local = 0.0;  // heading of the previous segment in its own root frame
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Mat3 r_prev = path[i - 1].root.orientation.toRotationMatrix();
    // Yaw of the previous root frame relative to the one before it.
    double frame_turn = 0.0;
    if (i >= 2) {
      const Mat3 r_prev2 = path[i - 2].root.orientation.toRotationMatrix();
      frame_turn = heading_of(Mat3(r_prev2.transpose() * r_prev));
    }
    const Vec3 r = root_displacement(path[i].root.position, path[i - 1].root.position, r_prev);
    double local;
    if (std::hypot(r.x(), r.y()) <= kStillEpsilon) {
      local = prev_local - frame_turn;
    } else {
      local = std::atan2(r.y(), r.x());
    }
    double delta = wrap_angle(i == 1 ? local : local - prev_local + frame_turn);
    if (std::abs(delta) < kStraightEpsilon) delta = 0.0;
    tokens.push_back(heading_bin(delta * kDeg));
    prev_local = local;
  }
  return tokens;
}

std::vector<RootState> root_path(const MotionSequence& seq) {
  std::vector<RootState> out;
  out.reserve(seq.size());
  for (const auto& f : seq.frames()) out.push_back(f.root);
  return out;
}

void write_trajectory(std::ostream& out, const Trajectory& t) {
  std::string buf = fmt::format("UATRAJ 1 {} {}\n", t.fps, t.roots.size());
  for (const RootState& r : t.roots) {
    const Quat& q = r.orientation;
    buf += fmt::format("{} {} {} {} {} {} {}\n", r.position.x(), r.position.y(), r.position.z(),
                       q.w(), q.x(), q.y(), q.z());
  }
  out << buf;
  if (!out) throw InputError("failed to write trajectory");
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& t) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  write_trajectory(out, t);
}

Trajectory read_trajectory(std::istream& in) {
  auto header = text_io::expect_header(in, "UATRAJ", "1", 2);
  Trajectory t;
  t.fps = text_io::parse_double(header[0]);
  if (!(t.fps > 0.0)) throw ParseError("trajectory fps must be positive");
  const long long n = text_io::parse_int(header[1]);
  if (n < 0) throw ParseError("negative trajectory length");
  std::string line;
  for (long long i = 0; i < n; ++i) {
    if (!text_io::next_line(in, line)) throw ParseError("trajectory file truncated");
    auto tok = text_io::split_ws(line);
    if (tok.size() != 7) throw ParseError(fmt::format("trajectory line {} needs 7 values", i));
    double v[7];
    for (int k = 0; k < 7; ++k) v[k] = text_io::parse_double(tok[static_cast<std::size_t>(k)]);
    Quat q(v[3], v[4], v[5], v[6]);
    if (!(q.norm() > 1e-6)) throw ParseError(fmt::format("zero quaternion on line {}", i));
    q.normalize();
    t.roots.push_back({Vec3(v[0], v[1], v[2]), q});
  }
  return t;
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return read_trajectory(in);
}

}  // namespace ua
