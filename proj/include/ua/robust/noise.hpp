#pragma once

#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/common/rng.hpp"
#include "ua/motion/motion.hpp"

namespace ua {

struct NoiseConfig {
  double sigma_base = 0.01;
  double p_burst = 0.05;  // burst start probability per frame
  double sigma_burst = 0.1;
  int burst_min = 8;  // frames
  int burst_max = 20;
  double burst_ar = 0.9;     // AR(1) coefficient of burst noise
  double burst_dim_p = 0.5;  // probability that a burst touches each DOF
  double p_jitter = 0.001;   // per DOF per frame
  double sigma_jitter = 0.3;
  double scale = 1.0;  // multiplies the three sigmas only

  // Throws ConfigError on probabilities outside [0, 1], negative sigmas or
  // scale, |burst_ar| >= 1, or an invalid duration range.
  void validate() const;
};

struct Burst {
  int start = 0;
  int length = 0;  // drawn length; the tail past the sequence end is dropped
  std::vector<int> dofs;
};

// The three additive components, each DOFs x frames.
struct NoiseSample {
  nn::Mat base;
  nn::Mat burst;
  nn::Mat jitter;
  std::vector<Burst> bursts;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> burst_mask;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> jitter_mask;

  nn::Mat total() const { return base + burst + jitter; }
};

// Draws noise for a (rows x frames) signal. Burst noise is stationary AR(1)
// with marginal std sigma_burst. The random draws do not depend on `scale`,
// so the same seed yields the same events at every scale.
NoiseSample sample_noise(Eigen::Index rows, Eigen::Index frames, const NoiseConfig& config,
                         Rng& rng);

// Adds base, burst and jitter noise to the joint angles; the root is kept.
// With all sigmas scaled to zero the input is returned unchanged.
MotionSequence corrupt(const MotionSequence& seq, const NoiseConfig& config, Rng& rng);
nn::Mat corrupt(const nn::Mat& dofs, const NoiseConfig& config, Rng& rng);

struct RoundtripError {
  double raw = 0.0;        // RMS(noisy - clean), rad
  double roundtrip = 0.0;  // RMS(decode(encode(noisy)) - clean), rad
};

// Throws ConfigError when the codec input width differs from the signal,
// DimensionError when clean and noisy differ in shape.
RoundtripError roundtrip_error(const nn::Mat& clean, const nn::Mat& noisy,
                               const CodecParams& codec);

}  // namespace ua
