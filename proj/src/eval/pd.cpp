#include "ua/eval/pd.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/eval/metrics.hpp"

namespace ua {

void PdConfig::validate(std::size_t dofs) const {
  if (!(omega_n > 0.0)) throw ConfigError("omega_n must be positive");
  if (!(zeta > 0.0)) throw ConfigError("zeta must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (decimation < 1) throw ConfigError("decimation must be at least 1");
  if (!(fall_bound > 0.0) || !(fall_time >= 0.0)) throw ConfigError("invalid fall criterion");
  if (!inertia.empty() && inertia.size() != dofs) {
    throw ConfigError(fmt::format("inertia has {} entries, expected {}", inertia.size(), dofs));
  }
  for (double i : inertia) {
    if (!(i > 0.0)) throw ConfigError("inertia must be positive");
  }
}

double PdConfig::omega_rad() const {
  return omega_in_hz ? 2.0 * std::numbers::pi * omega_n : omega_n;
}

PdGains pd_gains(const PdConfig& config, const KinematicModel& model) {
  config.validate(model.num_dofs());
  const double w = config.omega_rad();
  PdGains g;
  for (std::size_t j = 0; j < model.num_dofs(); ++j) {
    const double inertia = config.inertia.empty() ? model.dof_link(j).inertia : config.inertia[j];
    if (!(inertia > 0.0)) throw ConfigError(fmt::format("inertia of DOF {} must be positive", j));
    g.kp.push_back(inertia * w * w);
    g.kd.push_back(2.0 * inertia * config.zeta * w);
  }
  return g;
}

DofVector pd_torque(const DofVector& target, const DofVector& q, const DofVector& q_dot,
                    const PdGains& gains) {
  if (gains.kp.size() != kNumDofs || gains.kd.size() != kNumDofs) {
    throw DimensionError("PD gains must cover every DOF");
  }
  DofVector tau;
  for (std::size_t j = 0; j < kNumDofs; ++j) {
    tau[j] = gains.kp[j] * (target[j] - q[j]) - gains.kd[j] * q_dot[j];
  }
  return tau;
}

TrackResult simulate_track(const MotionSequence& reference, const PdConfig& config,
                           const KinematicModel& model) {
  const PdGains gains = pd_gains(config, model);
  const double control_fps = 1.0 / (config.dt * config.decimation);
  const MotionSequence ref =
      std::abs(reference.fps() - control_fps) < 1e-9 ? reference : resample(reference, control_fps);

  std::vector<double> inertia(kNumDofs);
  for (std::size_t j = 0; j < kNumDofs; ++j) {
    inertia[j] = config.inertia.empty() ? model.dof_link(j).inertia : config.inertia[j];
  }

  DofVector q = ref[0].dofs;
  DofVector q_dot;
  std::vector<double> over_time(kNumDofs, 0.0);
  bool fell = false;
  std::vector<MotionFrame> frames;
  frames.reserve(ref.size());
  frames.push_back(ref[0]);
  for (std::size_t k = 1; k < ref.size(); ++k) {
    const DofVector& from = ref[k - 1].dofs;
    const DofVector& to = ref[k].dofs;
    for (int s = 0; s < config.decimation; ++s) {
      const double a = static_cast<double>(s) / config.decimation;
      DofVector target;
      for (std::size_t j = 0; j < kNumDofs; ++j) target[j] = from[j] + a * (to[j] - from[j]);
      const DofVector tau = pd_torque(target, q, q_dot, gains);
      for (std::size_t j = 0; j < kNumDofs; ++j) {
        q_dot[j] += config.dt * tau[j] / inertia[j];
        q[j] += config.dt * q_dot[j];
      }
      const double t_next = a + 1.0 / config.decimation;
      for (std::size_t j = 0; j < kNumDofs; ++j) {
        const double err = from[j] + t_next * (to[j] - from[j]) - q[j];
        over_time[j] = std::abs(err) > config.fall_bound ? over_time[j] + config.dt : 0.0;
        if (over_time[j] > config.fall_time) fell = true;
      }
    }
    frames.push_back({ref[k].root, q});
  }

  TrackResult result{MotionSequence(ref.fps(), std::move(frames)), {}};
  TrialResult& trial = result.trial;
  trial.fell = fell;
  trial.mpjpe_cm = mpjpe(result.tracked, ref, model);
  trial.root_rmse_m = root_rmse(result.tracked, ref);
  trial.rewards.reserve(ref.size());
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const std::size_t p = k == 0 ? 0 : k - 1;
    RewardInput in{result.tracked[p], result.tracked[k], ref[p], ref[k],
                   ref[p].dofs,       ref[k].dofs,       1.0 / ref.fps()};
    trial.rewards.push_back(reward_terms(in, model));
  }
  return result;
}

}  // namespace ua
