#pragma once

#include <vector>

#include "ua/eval/reward.hpp"
#include "ua/motion/kinematics.hpp"

namespace ua {

struct PdConfig {
  double omega_n = 10.0;
  double zeta = 2.0;
  // Use 2*pi*omega_n rad/s instead of the literal omega_n.
  bool omega_in_hz = false;
  // Per-joint reflected inertia; empty takes the model's link inertias.
  std::vector<double> inertia;
  double fall_bound = 1.5;  // rad
  double fall_time = 0.5;   // s
  double dt = 1.0 / 200.0;
  int decimation = 4;
  // Domain-randomization ranges reported alongside results; unused here.
  double friction_min = 0.5;
  double friction_max = 1.5;

  // Throws ConfigError on non-positive omega_n, zeta, inertia, dt or
  // decimation, or an inertia list whose size differs from `dofs`.
  void validate(std::size_t dofs = kNumDofs) const;
  double omega_rad() const;
};

struct PdGains {
  std::vector<double> kp;
  std::vector<double> kd;
};

// k_p = I * omega^2, k_d = 2 * I * zeta * omega.
PdGains pd_gains(const PdConfig& config, const KinematicModel& model = KinematicModel::g1());

// tau = k_p (target - q) - k_d * q_dot.
DofVector pd_torque(const DofVector& target, const DofVector& q, const DofVector& q_dot,
                    const PdGains& gains);

struct TrialResult {
  bool fell = false;
  double mpjpe_cm = 0.0;
  double root_rmse_m = 0.0;
  std::vector<RewardBreakdown> rewards;  // one per frame
};

struct TrackResult {
  MotionSequence tracked;
  TrialResult trial;
};

// Tracks `reference` with independent per-joint double integrators
// q'' = tau / I. The reference is resampled to the control rate
// 1 / (dt * decimation) when needed; within a control step the target is
// linearly interpolated across substeps. Starts at rest on the first frame
// and copies the root from the reference. `fell` is set when any joint error
// stays above fall_bound for longer than fall_time.
TrackResult simulate_track(const MotionSequence& reference, const PdConfig& config = {},
                           const KinematicModel& model = KinematicModel::g1());

}  // namespace ua
