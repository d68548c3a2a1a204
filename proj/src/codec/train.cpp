#include "ua/codec/train.hpp"

#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ua/codec/optim.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"

namespace ua {

using nn::Mat;
using nn::SeqShape;

namespace {

CodecParams zero_grads(const CodecParams& params) {
  CodecParams g = params;
  for (Mat* t : g.tensors()) t->setZero();
  return g;
}

// Copies `window` frames of `seq` starting at `start` into columns of `dst`,
// repeating the last frame past the end.
void copy_window(const Mat& seq, Eigen::Index start, int window, Mat& dst, Eigen::Index col0) {
  for (int t = 0; t < window; ++t) {
    const Eigen::Index src = std::min<Eigen::Index>(start + t, seq.cols() - 1);
    dst.col(col0 + t) = seq.col(src);
  }
}

std::vector<Mat> eval_subset(std::span<const Mat> corpus, int count) {
  const std::size_t n = corpus.size();
  const std::size_t k = count <= 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(count));
  std::vector<Mat> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(corpus[i * n / k]);
  return out;
}

double mse_and_grad(const Mat& recon, const Mat& x, Mat* grad) {
  const Mat diff = recon - x;
  const double count = static_cast<double>(diff.size());
  if (grad != nullptr) *grad = diff * (2.0 / count);
  return diff.squaredNorm() / count;
}

}  // namespace

void round_to_float(CodecParams& params) {
  for (Mat* t : params.tensors()) {
    *t = t->unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  }
}

double reconstruction_mse(std::span<const Mat> sequences, const CodecParams& params) {
  double sum = 0.0;
  double count = 0.0;
  for (const Mat& seq : sequences) {
    const Mat recon = roundtrip(seq, params);
    sum += (recon - seq).squaredNorm();
    count += static_cast<double>(seq.size());
  }
  return count > 0.0 ? sum / count : 0.0;
}

TrainResult train_codec(std::span<const Mat> corpus, const CodecConfig& config,
                        const TrainOptions& options) {
  if (corpus.empty()) throw PreconditionError("training corpus is empty");
  config.validate();
  if (options.window <= 0 || options.window % config.downsample != 0) {
    throw ConfigError(fmt::format("window {} must be a positive multiple of downsample {}",
                                  options.window, config.downsample));
  }
  if (options.batch_size <= 0 || options.steps < 0 || options.steps_per_epoch <= 0) {
    throw ConfigError("batch_size and steps_per_epoch must be positive, steps non-negative");
  }
  if (!(options.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  for (const Mat& seq : corpus) {
    if (seq.rows() != config.input_dim) {
      throw DimensionError(fmt::format("corpus sequence has {} rows, codec expects {}",
                                       seq.rows(), config.input_dim));
    }
    if (seq.cols() == 0) throw PreconditionError("corpus contains an empty sequence");
  }

  TrainResult result;
  result.params = init_codec(config, derive_seed(options.seed, 1));
  CodecParams& params = result.params;
  const std::vector<Mat> eval_set = eval_subset(corpus, options.eval_sequences);
  result.initial_loss = reconstruction_mse(eval_set, params);

  Rng rng = make_rng(options.seed, 2);
  std::vector<Mat*> weights = params.tensors();
  Adam adam(weights, options.beta1, options.beta2, options.adam_epsilon);

  const SeqShape shape{options.batch_size, options.window};
  Mat batch(config.input_dim, shape.columns());
  double epoch_sum = 0.0;
  int epoch_count = 0;
  for (int step = 0; step < options.steps; ++step) {
    for (int b = 0; b < options.batch_size; ++b) {
      const std::size_t pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(corpus.size()));
      const Mat& seq = corpus[std::min(pick, corpus.size() - 1)];
      const Eigen::Index span = std::max<Eigen::Index>(seq.cols() - options.window, 0);
      const Eigen::Index start = static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(span + 1));
      copy_window(seq, std::min(start, span), options.window, batch,
                  static_cast<Eigen::Index>(b) * options.window);
    }
    CodecTape tape;
    const Mat recon = codec_forward(params, batch, shape, QuantMode::kRound, &tape);
    Mat drecon;
    const double loss = mse_and_grad(recon, batch, &drecon);
    if (!std::isfinite(loss)) {
      throw TrainingError("codec training loss is not finite", static_cast<std::size_t>(step));
    }
    if (step == 0) result.step0_loss = loss;
    CodecParams grads = zero_grads(params);
    codec_backward(params, tape, drecon, grads);

    const double lr = options.cosine_decay
                          ? cosine_lr(options.learning_rate, step, options.steps)
                          : options.learning_rate;
    if (options.optimizer == Optimizer::kSgd) {
      sgd_step(weights, grads.tensors(), lr);
    } else {
      adam.step(weights, grads.tensors(), lr);
    }

    epoch_sum += loss;
    ++epoch_count;
    if (epoch_count == options.steps_per_epoch || step + 1 == options.steps) {
      result.epoch_loss.push_back(epoch_sum / epoch_count);
      spdlog::debug("codec epoch {} loss {:.6g}", result.epoch_loss.size(), result.epoch_loss.back());
      epoch_sum = 0.0;
      epoch_count = 0;
    }
  }

  round_to_float(params);
  params.trained = true;
  result.final_loss = reconstruction_mse(eval_set, params);
  if (!std::isfinite(result.final_loss)) {
    throw TrainingError("codec parameters diverged", static_cast<std::size_t>(options.steps));
  }
  return result;
}

TrainResult train_codec(std::span<const MotionSequence> corpus, const CodecConfig& config,
                        const TrainOptions& options) {
  std::vector<Mat> mats;
  mats.reserve(corpus.size());
  for (const MotionSequence& seq : corpus) mats.push_back(dof_matrix(seq));
  return train_codec(std::span<const Mat>(mats), config, options);
}

double gradient_check(const CodecParams& params, const Mat& probe, SeqShape shape,
                      double epsilon, int samples, std::uint64_t seed) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3)) {
    throw PreconditionError(fmt::format("epsilon {} outside [1e-6, 1e-3]", epsilon));
  }
  if (probe.rows() != params.config.input_dim || probe.cols() != shape.columns()) {
    throw DimensionError("probe batch does not match the codec input shape");
  }
  CodecTape tape;
  const Mat recon = codec_forward(params, probe, shape, QuantMode::kSoft, &tape);
  Mat drecon;
  mse_and_grad(recon, probe, &drecon);
  CodecParams grads = zero_grads(params);
  codec_backward(params, tape, drecon, grads);

  CodecParams work = params;
  std::vector<Mat*> w = work.tensors();
  std::vector<Mat*> g = grads.tensors();
  std::size_t total = 0;
  for (const Mat* t : w) total += static_cast<std::size_t>(t->size());

  auto loss_at = [&]() {
    return mse_and_grad(codec_forward(work, probe, shape, QuantMode::kSoft, nullptr), probe,
                        nullptr);
  };
  Rng rng = make_rng(seed, 3);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::size_t flat = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(total));
    std::size_t ti = 0;
    while (flat >= static_cast<std::size_t>(w[ti]->size())) {
      flat -= static_cast<std::size_t>(w[ti]->size());
      ++ti;
    }
    double& value = w[ti]->data()[flat];
    const double saved = value;
    value = saved + epsilon;
    const double up = loss_at();
    value = saved - epsilon;
    const double down = loss_at();
    value = saved;
    const double fd = (up - down) / (2.0 * epsilon);
    const double analytic = g[ti]->data()[flat];
    const double rel = std::abs(analytic - fd) / std::max(1e-8, std::abs(analytic) + std::abs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace ua
