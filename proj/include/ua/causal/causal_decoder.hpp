#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/codec/layers.hpp"
#include "ua/motion/motion.hpp"

namespace ua {

inline constexpr int kDefaultChunkTokens = 5;

struct CausalConfig {
  Levels levels{8, 8, 8, 6, 5};
  int input_dim = 29;
  int downsample = 2;
  int hidden = 128;
  int kernel = 4;
  int layers = 3;
  int chunk_size = kDefaultChunkTokens;

  int latent_dim() const { return static_cast<int>(levels.size()); }
  void validate() const;  // throws ConfigError
  // Matches levels, width and downsample to an offline codec.
  static CausalConfig for_codec(const CodecConfig& codec);
  bool operator==(const CausalConfig&) const = default;
};

// Stack of causal convolutions over token embeddings. Layer l computes
//   h_t = sum_{k=0}^{K-1} W_k h_{t-k} + b
// with GELU between layers. The last layer emits downsample frames per token.
struct CausalDecoderParams {
  CausalConfig config;
  std::vector<nn::Conv1d> layers;  // left padding K-1, stride 1
  bool trained = false;

  std::vector<nn::Mat*> tensors();
  std::vector<const nn::Mat*> tensors() const;
};

CausalDecoderParams init_causal(const CausalConfig& config, std::uint64_t seed);

// A causal conv layer from per-lag matrices: lags[k] multiplies h_{t-k}.
nn::Conv1d causal_layer_from_lags(const std::vector<nn::Mat>& lags, const nn::Mat& bias);

// Streaming state for one stream.
class StreamState {
 public:
  explicit StreamState(const CausalDecoderParams& params);
  int chunk_size() const { return chunk_size_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  friend nn::Mat causal_step(const CausalDecoderParams&, StreamState&, const nn::Mat&);
  friend nn::Mat push_tokens(StreamState&, std::span<const TokenId>, const CausalDecoderParams&);
  friend nn::Mat flush(StreamState&, const CausalDecoderParams&);

  int chunk_size_;
  // Per layer, the last K-1 inputs, oldest first (zero at stream start).
  std::vector<std::deque<Eigen::VectorXd>> history_;
  std::vector<TokenId> pending_;
};

// Feeds one input column (latent_dim x 1) through every layer and advances
// the state. Returns the final layer output (downsample * input_dim x 1).
nn::Mat causal_step(const CausalDecoderParams& params, StreamState& state, const nn::Mat& input);

// Queues local motion ids; decodes every completed chunk. Returns the
// emitted frames as (input_dim x frames), possibly empty. Throws RangeError
// for an invalid id, leaving the state unchanged.
nn::Mat push_tokens(StreamState& state, std::span<const TokenId> tokens,
                    const CausalDecoderParams& params);
// Decodes any partial chunk.
nn::Mat flush(StreamState& state, const CausalDecoderParams& params);

// push_tokens of the whole sequence followed by flush.
nn::Mat decode_causal(std::span<const TokenId> tokens, const CausalDecoderParams& params);

struct CausalTrainOptions {
  int steps = 1500;
  int batch_size = 8;
  int window = 16;  // tokens per training window
  double learning_rate = 2e-3;
  bool cosine_decay = true;
  int steps_per_epoch = 50;
  std::uint64_t seed = 0;
};

struct CausalTrainResult {
  CausalDecoderParams params;
  std::vector<double> epoch_loss;
  double final_loss = 0.0;  // streaming-decode MSE over the corpus
};

// Fits the causal decoder to reproduce ground-truth frames from the offline
// codec's tokens of each sequence. Throws PreconditionError on an empty
// corpus or untrained codec, TrainingError on a non-finite loss.
CausalTrainResult train_causal(const CodecParams& codec, std::span<const nn::Mat> corpus,
                               const CausalConfig& config, const CausalTrainOptions& options);
CausalTrainResult train_causal(const CodecParams& codec, std::span<const MotionSequence> corpus,
                               const CausalConfig& config, const CausalTrainOptions& options);

// Same container as the codec file with causal=1.
void save_causal(std::ostream& out, const CausalDecoderParams& params);
void save_causal(const std::filesystem::path& path, const CausalDecoderParams& params);
CausalDecoderParams load_causal(std::istream& in);
CausalDecoderParams load_causal(const std::filesystem::path& path);

}  // namespace ua
