#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/motion/motion.hpp"

namespace ua {

enum class Optimizer { kSgd, kAdam };

struct TrainOptions {
  Optimizer optimizer = Optimizer::kSgd;
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool cosine_decay = false;
  int steps = 600;
  int steps_per_epoch = 50;
  int batch_size = 8;
  int window = 32;  // frames per training window, a multiple of downsample
  // Windows used to report initial/final loss; 0 evaluates every sequence.
  int eval_sequences = 64;
  std::uint64_t seed = 0;
};

struct TrainResult {
  CodecParams params;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
  double step0_loss = 0.0;         // batch loss before the first update
  double initial_loss = 0.0;       // evaluation MSE before training
  double final_loss = 0.0;         // evaluation MSE after training
};

// Minimizes mean squared reconstruction error over random windows of the
// corpus. Each sequence is (input_dim x frames). Parameters are rounded to
// float32 at the end so a saved file reloads bit-exactly.
// Throws PreconditionError on an empty corpus, TrainingError on a
// non-finite loss.
TrainResult train_codec(std::span<const nn::Mat> corpus, const CodecConfig& config,
                        const TrainOptions& options);
TrainResult train_codec(std::span<const MotionSequence> corpus, const CodecConfig& config,
                        const TrainOptions& options);

// Mean squared roundtrip error over the given sequences.
double reconstruction_mse(std::span<const nn::Mat> sequences, const CodecParams& params);

// Largest relative difference between analytic and central-difference
// gradients of the MSE loss over `samples` randomly chosen parameters. The
// quantizer runs in soft mode so the loss is differentiable.
// Throws PreconditionError unless epsilon is in [1e-6, 1e-3].
double gradient_check(const CodecParams& params, const nn::Mat& probe, nn::SeqShape shape,
                      double epsilon, int samples = 64, std::uint64_t seed = 0);

// Rounds every parameter to the nearest float32 value.
void round_to_float(CodecParams& params);

}  // namespace ua
