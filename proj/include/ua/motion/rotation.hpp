#pragma once

#include <Eigen/Geometry>

namespace ua {

// Quaternions are (w, x, y, z), Hamilton product, right-handed world frame
// with z up and x forward.
using Quat = Eigen::Quaterniond;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

Quat yaw_quat(double yaw_rad);

// Heading of a rotation: the angle of its rotated x-axis in the horizontal
// plane, in (-pi, pi].
double heading_of(const Quat& q);
double heading_of(const Mat3& r);

// Rotation vector (axis * angle) of q, angle in [0, pi].
Vec3 rotation_log(const Quat& q);

// Shortest-arc spherical interpolation; t = 0 returns a, t = 1 returns b exactly.
Quat slerp(const Quat& a, const Quat& b, double t);

// Wraps an angle to [-pi, pi).
double wrap_angle(double rad);

}  // namespace ua
