#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/motion/motion.hpp"

namespace ua {

inline constexpr double kTrajectoryFps = 5.0;
inline constexpr int kTrajectoryBins = 60;

// Displacement p - p_prev expressed in the previous root frame.
Vec3 root_displacement(const Vec3& p, const Vec3& p_prev, const Mat3& r_prev);

// Bin of a wrapped heading change in degrees: floor((d + 180) / 6) in [0, 59].
int heading_bin(double delta_deg);

// A root path at `fps`, resampled to 5 FPS. Token i (one per segment between
// consecutive samples) bins the change of travel heading from the previous
// segment; the first segment is measured against the initial root heading.
// A zero displacement keeps the previous heading. Throws PreconditionError
// with fewer than two samples after resampling.
std::vector<TokenId> tokenize_trajectory(const std::vector<RootState>& roots, double fps);

struct Trajectory {
  double fps = kTrajectoryFps;
  std::vector<RootState> roots;
};

// Trajectory file: `UATRAJ 1 <fps> <n>`, then `px py pz qw qx qy qz` per line.
void write_trajectory(std::ostream& out, const Trajectory& t);
void write_trajectory(const std::filesystem::path& path, const Trajectory& t);
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory(const std::filesystem::path& path);

// Root states of a motion sequence.
std::vector<RootState> root_path(const MotionSequence& seq);

}  // namespace ua
