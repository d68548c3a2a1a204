#include "ua/robust/noise.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double rms(const nn::Mat& m) {
  return m.size() == 0 ? 0.0 : std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

}  // namespace

void NoiseConfig::validate() const {
  if (!is_probability(p_burst) || !is_probability(p_jitter) || !is_probability(burst_dim_p)) {
    throw ConfigError("noise probabilities must lie in [0, 1]");
  }
  if (!(sigma_base >= 0.0) || !(sigma_burst >= 0.0) || !(sigma_jitter >= 0.0) || !(scale >= 0.0)) {
    throw ConfigError("noise sigmas and scale must be non-negative");
  }
  if (burst_min < 1 || burst_max < burst_min) {
    throw ConfigError(fmt::format("invalid burst duration range [{}, {}]", burst_min, burst_max));
  }
  if (!(std::abs(burst_ar) < 1.0)) throw ConfigError("burst AR coefficient must satisfy |a| < 1");
}

NoiseSample sample_noise(Eigen::Index rows, Eigen::Index frames, const NoiseConfig& config,
                         Rng& rng) {
  config.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  NoiseSample s;
  s.base.resize(rows, frames);
  s.burst = nn::Mat::Zero(rows, frames);
  s.jitter = nn::Mat::Zero(rows, frames);
  s.burst_mask.setConstant(rows, frames, false);
  s.jitter_mask.setConstant(rows, frames, false);

  const double base_sigma = config.scale * config.sigma_base;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index d = 0; d < rows; ++d) s.base(d, t) = base_sigma * normal(rng);
  }

  const double burst_sigma = config.scale * config.sigma_burst;
  const double innovation = std::sqrt(1.0 - config.burst_ar * config.burst_ar);
  const int span = config.burst_max - config.burst_min + 1;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (uniform01(rng) >= config.p_burst) continue;
    Burst b;
    b.start = static_cast<int>(t);
    b.length = config.burst_min + std::min(static_cast<int>(uniform01(rng) * span), span - 1);
    for (Eigen::Index d = 0; d < rows; ++d) {
      if (uniform01(rng) < config.burst_dim_p) b.dofs.push_back(static_cast<int>(d));
    }
    for (int d : b.dofs) {
      double value = normal(rng);
      for (int k = 0; k < b.length; ++k) {
        if (k > 0) value = config.burst_ar * value + innovation * normal(rng);
        const Eigen::Index f = t + k;
        if (f >= frames) continue;
        s.burst(d, f) += burst_sigma * value;
        s.burst_mask(d, f) = true;
      }
    }
    s.bursts.push_back(std::move(b));
  }

  const double jitter_sigma = config.scale * config.sigma_jitter;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index d = 0; d < rows; ++d) {
      if (uniform01(rng) >= config.p_jitter) continue;
      s.jitter(d, t) = jitter_sigma * normal(rng);
      s.jitter_mask(d, t) = true;
    }
  }
  return s;
}

nn::Mat corrupt(const nn::Mat& dofs, const NoiseConfig& config, Rng& rng) {
  const NoiseSample s = sample_noise(dofs.rows(), dofs.cols(), config, rng);
  if (config.scale == 0.0) return dofs;
  return dofs + s.total();
}

MotionSequence corrupt(const MotionSequence& seq, const NoiseConfig& config, Rng& rng) {
  const nn::Mat noisy = corrupt(dof_matrix(seq), config, rng);
  if (config.scale == 0.0) return seq;
  std::vector<RootState> roots;
  roots.reserve(seq.size());
  for (const MotionFrame& f : seq.frames()) roots.push_back(f.root);
  return from_dof_matrix(noisy, seq.fps(), roots);
}

RoundtripError roundtrip_error(const nn::Mat& clean, const nn::Mat& noisy,
                               const CodecParams& codec) {
  if (codec.config.input_dim != clean.rows()) {
    throw ConfigError(fmt::format("codec expects {} DOFs, signal has {}", codec.config.input_dim,
                                  clean.rows()));
  }
  if (clean.rows() != noisy.rows() || clean.cols() != noisy.cols()) {
    throw DimensionError("clean and noisy signals differ in shape");
  }
  return {rms(noisy - clean), rms(roundtrip(noisy, codec) - clean)};
}

}  // namespace ua
