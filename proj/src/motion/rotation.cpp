#include "ua/motion/rotation.hpp"

#include <cmath>
#include <numbers>

namespace ua {

Quat yaw_quat(double yaw_rad) {
  return Quat(Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()));
}

double heading_of(const Mat3& r) { return std::atan2(r(1, 0), r(0, 0)); }

double heading_of(const Quat& q) { return heading_of(q.toRotationMatrix()); }

Vec3 rotation_log(const Quat& q) {
  Quat n = q.normalized();
  if (n.w() < 0.0) n.coeffs() = -n.coeffs();
  const double s = n.vec().norm();
  if (s < 1e-12) return 2.0 * n.vec();
  const double angle = 2.0 * std::atan2(s, n.w());
  return n.vec() * (angle / s);
}

Quat slerp(const Quat& a, const Quat& b, double t) {
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  if (a.coeffs() == b.coeffs()) return a;
  return a.slerp(t, b).normalized();
}

double wrap_angle(double rad) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double w = std::fmod(rad + std::numbers::pi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - std::numbers::pi;
}

}  // namespace ua
