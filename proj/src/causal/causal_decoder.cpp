#include "ua/causal/causal_decoder.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ua/codec/optim.hpp"
#include "ua/codec/params_io.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

using nn::Mat;
using nn::SeqShape;

void CausalConfig::validate() const {
  if (levels.empty()) throw ConfigError("causal decoder needs latent levels");
  for (int l : levels) {
    if (l < 2) throw ConfigError("quantization levels must be >= 2");
  }
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (downsample != 2 && downsample != 4) throw ConfigError("downsample must be 2 or 4");
  if (hidden < 1 || kernel < 1 || layers < 1) {
    throw ConfigError("hidden, kernel and layers must be positive");
  }
  if (chunk_size < 1) throw ConfigError("chunk_size must be positive");
}

CausalConfig CausalConfig::for_codec(const CodecConfig& codec) {
  CausalConfig c;
  c.levels = codec.levels;
  c.input_dim = codec.input_dim;
  c.downsample = codec.downsample;
  return c;
}

std::vector<Mat*> CausalDecoderParams::tensors() {
  std::vector<Mat*> out;
  for (nn::Conv1d& l : layers) l.collect(out);
  return out;
}

std::vector<const Mat*> CausalDecoderParams::tensors() const {
  auto v = const_cast<CausalDecoderParams*>(this)->tensors();
  return {v.begin(), v.end()};
}

CausalDecoderParams init_causal(const CausalConfig& config, std::uint64_t seed) {
  config.validate();
  CausalDecoderParams p;
  p.config = config;
  Rng rng = make_rng(seed, 51);
  const int k = config.kernel;
  for (int l = 0; l < config.layers; ++l) {
    const int in = l == 0 ? config.latent_dim() : config.hidden;
    const int out = l + 1 == config.layers ? config.downsample * config.input_dim : config.hidden;
    nn::Conv1d conv = nn::Conv1d::make(in, out, k, 1, k - 1, 0);
    nn::init_weight(conv.weight, k * in, 1.0, rng);
    p.layers.push_back(std::move(conv));
  }
  return p;
}

nn::Conv1d causal_layer_from_lags(const std::vector<Mat>& lags, const Mat& bias) {
  if (lags.empty()) throw ConfigError("causal layer needs at least one lag matrix");
  const auto out = static_cast<int>(lags[0].rows());
  const auto in = static_cast<int>(lags[0].cols());
  const int k = static_cast<int>(lags.size());
  if (bias.rows() != out || bias.cols() != 1) throw DimensionError("bias must be out x 1");
  nn::Conv1d conv = nn::Conv1d::make(in, out, k, 1, k - 1, 0);
  for (int lag = 0; lag < k; ++lag) {
    const Mat& w = lags[static_cast<std::size_t>(lag)];
    if (w.rows() != out || w.cols() != in) throw DimensionError("lag matrices differ in shape");
    // Tap K-1 sees the current input, tap 0 the oldest.
    conv.weight.middleCols((k - 1 - lag) * in, in) = w;
  }
  conv.bias = bias;
  return conv;
}

StreamState::StreamState(const CausalDecoderParams& params)
    : chunk_size_(params.config.chunk_size) {
  for (const nn::Conv1d& l : params.layers) {
    history_.emplace_back(static_cast<std::size_t>(l.kernel - 1), Eigen::VectorXd::Zero(l.in));
  }
}

Mat causal_step(const CausalDecoderParams& params, StreamState& state, const Mat& input) {
  Eigen::VectorXd x = input;
  const std::size_t n = params.layers.size();
  for (std::size_t l = 0; l < n; ++l) {
    const nn::Conv1d& conv = params.layers[l];
    if (x.size() != conv.in) throw DimensionError("causal step input has the wrong width");
    auto& hist = state.history_[l];
    Eigen::VectorXd col(static_cast<Eigen::Index>(conv.kernel) * conv.in);
    Eigen::Index at = 0;
    for (const Eigen::VectorXd& h : hist) {
      col.segment(at, conv.in) = h;
      at += conv.in;
    }
    col.segment(at, conv.in) = x;
    if (!hist.empty()) {
      hist.pop_front();
      hist.push_back(x);
    }
    Eigen::VectorXd y = conv.weight * col + conv.bias;
    x = l + 1 < n ? Eigen::VectorXd(nn::activate(nn::Activation::kGelu, y)) : y;
  }
  return x;
}

namespace {

Mat decode_pending(StreamState& state, std::vector<TokenId>& pending,
                   const CausalDecoderParams& params) {
  const CausalConfig& cfg = params.config;
  Mat frames(cfg.input_dim, static_cast<Eigen::Index>(pending.size()) * cfg.downsample);
  Eigen::Index col = 0;
  for (TokenId token : pending) {
    const std::vector<double> e = token_embedding(token, cfg.levels);
    const Mat input = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
    const Mat y = causal_step(params, state, input);
    for (int f = 0; f < cfg.downsample; ++f) {
      frames.col(col++) = y.block(static_cast<Eigen::Index>(f) * cfg.input_dim, 0, cfg.input_dim, 1);
    }
  }
  pending.clear();
  return frames;
}

}  // namespace

Mat push_tokens(StreamState& state, std::span<const TokenId> tokens,
                const CausalDecoderParams& params) {
  const std::int64_t size = codebook_size(params.config.levels);
  for (TokenId t : tokens) {
    if (t < 0 || t >= size) throw RangeError(fmt::format("motion token {} outside codebook", t));
  }
  Mat out(params.config.input_dim, 0);
  for (TokenId t : tokens) {
    state.pending_.push_back(t);
    if (static_cast<int>(state.pending_.size()) == state.chunk_size_) {
      Mat frames = decode_pending(state, state.pending_, params);
      Mat joined(out.rows(), out.cols() + frames.cols());
      joined << out, frames;
      out.swap(joined);
    }
  }
  return out;
}

Mat flush(StreamState& state, const CausalDecoderParams& params) {
  return decode_pending(state, state.pending_, params);
}

Mat decode_causal(std::span<const TokenId> tokens, const CausalDecoderParams& params) {
  StreamState state(params);
  Mat a = push_tokens(state, tokens, params);
  Mat b = flush(state, params);
  Mat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

namespace {

struct EncodedSequence {
  Mat embedding;  // latent_dim x M
  Mat target;     // (downsample * input_dim) x M
  std::vector<TokenId> tokens;
  Mat frames;     // input_dim x M*downsample
};

EncodedSequence encode_for_training(const Mat& seq, const CodecParams& codec) {
  const CodecConfig& cc = codec.config;
  EncodedSequence e;
  e.frames = pad_to_multiple(seq, cc.downsample);
  e.tokens = encode(e.frames, codec);
  const auto m = static_cast<Eigen::Index>(e.tokens.size());
  e.embedding.resize(cc.latent_dim(), m);
  e.target.resize(static_cast<Eigen::Index>(cc.downsample) * cc.input_dim, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto emb = token_embedding(e.tokens[static_cast<std::size_t>(t)], cc.levels);
    for (std::size_t i = 0; i < emb.size(); ++i) e.embedding(static_cast<Eigen::Index>(i), t) = emb[i];
    for (int f = 0; f < cc.downsample; ++f) {
      e.target.block(static_cast<Eigen::Index>(f) * cc.input_dim, t, cc.input_dim, 1) =
          e.frames.col(t * cc.downsample + f);
    }
  }
  return e;
}

double streaming_mse(const std::vector<EncodedSequence>& data, const CausalDecoderParams& params) {
  double sum = 0.0;
  double count = 0.0;
  for (const EncodedSequence& e : data) {
    const Mat y = decode_causal(e.tokens, params);
    sum += (y - e.frames).squaredNorm();
    count += static_cast<double>(e.frames.size());
  }
  return count > 0.0 ? sum / count : 0.0;
}

}  // namespace

CausalTrainResult train_causal(const CodecParams& codec, std::span<const Mat> corpus,
                               const CausalConfig& config, const CausalTrainOptions& options) {
  if (corpus.empty()) throw PreconditionError("causal training corpus is empty");
  if (!codec.trained) throw PreconditionError("causal decoder training needs a trained codec");
  config.validate();
  if (config.levels != codec.config.levels || config.input_dim != codec.config.input_dim ||
      config.downsample != codec.config.downsample) {
    throw ConfigError("causal decoder config does not match the codec");
  }
  if (options.window < 1 || options.batch_size < 1 || options.steps < 0 ||
      options.steps_per_epoch < 1 || !(options.learning_rate > 0.0)) {
    throw ConfigError("invalid causal training options");
  }

  std::vector<EncodedSequence> data;
  data.reserve(corpus.size());
  for (const Mat& seq : corpus) {
    if (seq.rows() != config.input_dim || seq.cols() == 0) {
      throw DimensionError("corpus sequence does not match the decoder width");
    }
    data.push_back(encode_for_training(seq, codec));
  }

  CausalTrainResult result;
  result.params = init_causal(config, options.seed);
  CausalDecoderParams& params = result.params;
  std::vector<Mat*> weights = params.tensors();
  Adam adam(weights);
  Rng rng = make_rng(options.seed, 52);

  const int w = options.window;
  const SeqShape shape{options.batch_size, w};
  Mat input(config.latent_dim(), shape.columns());
  Mat target(static_cast<Eigen::Index>(config.downsample) * config.input_dim, shape.columns());
  const std::size_t n_layers = params.layers.size();
  double epoch_sum = 0.0;
  int epoch_count = 0;
  for (int step = 0; step < options.steps; ++step) {
    for (int b = 0; b < options.batch_size; ++b) {
      const auto pick = std::min(data.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(data.size())));
      const EncodedSequence& e = data[pick];
      const Eigen::Index m = e.embedding.cols();
      const Eigen::Index span = std::max<Eigen::Index>(m - w, 0);
      const auto start = std::min(span, static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(span + 1)));
      for (int t = 0; t < w; ++t) {
        const Eigen::Index src = std::min<Eigen::Index>(start + t, m - 1);
        input.col(b * w + t) = e.embedding.col(src);
        target.col(b * w + t) = e.target.col(src);
      }
    }

    std::vector<nn::Conv1d::Cache> caches(n_layers);
    std::vector<Mat> pre(n_layers);
    Mat h = input;
    for (std::size_t l = 0; l < n_layers; ++l) {
      pre[l] = params.layers[l].forward(h, shape, &caches[l]);
      h = l + 1 < n_layers ? nn::activate(nn::Activation::kGelu, pre[l]) : pre[l];
    }
    const Mat diff = h - target;
    const double loss = diff.squaredNorm() / static_cast<double>(diff.size());
    if (!std::isfinite(loss)) {
      throw TrainingError("causal training loss is not finite", static_cast<std::size_t>(step));
    }
    CausalDecoderParams grads = params;
    for (Mat* g : grads.tensors()) g->setZero();
    Mat d = diff * (2.0 / static_cast<double>(diff.size()));
    for (std::size_t l = n_layers; l-- > 0;) {
      if (l + 1 < n_layers) d = nn::activate_backward(nn::Activation::kGelu, pre[l], d);
      d = params.layers[l].backward(d, caches[l], grads.layers[l]);
    }
    const double lr = options.cosine_decay ? cosine_lr(options.learning_rate, step, options.steps)
                                           : options.learning_rate;
    adam.step(weights, grads.tensors(), lr);

    epoch_sum += loss;
    ++epoch_count;
    if (epoch_count == options.steps_per_epoch || step + 1 == options.steps) {
      result.epoch_loss.push_back(epoch_sum / epoch_count);
      spdlog::debug("causal epoch {} loss {:.6g}", result.epoch_loss.size(), result.epoch_loss.back());
      epoch_sum = 0.0;
      epoch_count = 0;
    }
  }

  for (Mat* t : params.tensors()) {
    *t = t->unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  }
  params.trained = true;
  const std::size_t eval_n = std::min<std::size_t>(data.size(), 64);
  std::vector<EncodedSequence> eval;
  for (std::size_t i = 0; i < eval_n; ++i) eval.push_back(data[i * data.size() / eval_n]);
  result.final_loss = streaming_mse(eval, params);
  if (!std::isfinite(result.final_loss)) {
    throw TrainingError("causal decoder diverged", static_cast<std::size_t>(options.steps));
  }
  return result;
}

CausalTrainResult train_causal(const CodecParams& codec, std::span<const MotionSequence> corpus,
                               const CausalConfig& config, const CausalTrainOptions& options) {
  std::vector<Mat> mats;
  for (const MotionSequence& s : corpus) mats.push_back(dof_matrix(s));
  return train_causal(codec, std::span<const Mat>(mats), config, options);
}

void save_causal(std::ostream& out, const CausalDecoderParams& params) {
  const CausalConfig& c = params.config;
  ParamContainer pc;
  pc.config = {
      {"causal", "1"},
      {"levels", fmt::format("{}", fmt::join(c.levels, ","))},
      {"input_dim", std::to_string(c.input_dim)},
      {"downsample", std::to_string(c.downsample)},
      {"hidden", std::to_string(c.hidden)},
      {"kernel", std::to_string(c.kernel)},
      {"layers", std::to_string(c.layers)},
      {"chunk_size", std::to_string(c.chunk_size)},
      {"trained", params.trained ? "1" : "0"},
  };
  for (const Mat* t : params.tensors()) pc.tensors.push_back(*t);
  write_container(out, pc);
}

void save_causal(const std::filesystem::path& path, const CausalDecoderParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  save_causal(out, params);
}

CausalDecoderParams load_causal(std::istream& in) {
  const ParamContainer pc = read_container(in);
  if (config_get(pc, "causal") != "1") throw ParseError("file holds an offline codec, not a causal decoder");
  CausalConfig c;
  c.levels.clear();
  const std::string levels = config_get(pc, "levels");
  std::size_t start = 0;
  while (start <= levels.size()) {
    const std::size_t comma = std::min(levels.find(',', start), levels.size());
    c.levels.push_back(static_cast<int>(
        text_io::parse_int(std::string_view(levels).substr(start, comma - start))));
    start = comma + 1;
  }
  c.input_dim = config_int(pc, "input_dim");
  c.downsample = config_int(pc, "downsample");
  c.hidden = config_int(pc, "hidden");
  c.kernel = config_int(pc, "kernel");
  c.layers = config_int(pc, "layers");
  c.chunk_size = config_int(pc, "chunk_size");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("invalid causal decoder config: ") + e.what());
  }
  CausalDecoderParams p = init_causal(c, 0);
  p.trained = config_get(pc, "trained") == "1";
  auto dst = p.tensors();
  if (dst.size() != pc.tensors.size()) throw ParseError("causal decoder tensor count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (dst[i]->rows() != pc.tensors[i].rows() || dst[i]->cols() != pc.tensors[i].cols()) {
      throw ParseError(fmt::format("causal tensor {} has the wrong shape", i));
    }
    *dst[i] = pc.tensors[i];
  }
  return p;
}

CausalDecoderParams load_causal(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return load_causal(in);
}

}  // namespace ua
