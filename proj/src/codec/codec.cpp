#include "ua/codec/codec.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

using nn::Mat;
using nn::SeqShape;

namespace {

// Per-block strides: encoder {first, second}; the decoder runs them reversed.
std::pair<int, int> block_strides(int downsample) {
  return downsample == 4 ? std::pair{2, 2} : std::pair{2, 1};
}

nn::Conv1d strided_conv(int in, int out, int kernel, int stride) {
  const int pad = (kernel - 1) / 2;
  return nn::Conv1d::make(in, out, kernel, stride, pad, pad);
}

nn::ConvTranspose1d upsample_conv(int in, int out, int kernel, int stride) {
  return nn::ConvTranspose1d::make(in, out, kernel, stride, (kernel - 1) / 2, stride - 1);
}

Mat quantize_forward(const Mat& z, const Levels& levels, QuantMode mode, Mat* tanh_out) {
  Mat u = z.array().tanh();
  Mat q(z.rows(), z.cols());
  if (mode == QuantMode::kSoft) {
    q = u;
  } else {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const int level = levels[static_cast<std::size_t>(i)];
      const double top = static_cast<double>(level - 1);
      for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double v = std::clamp(round_half_away((u(i, j) + 1.0) * 0.5 * top), 0.0, top);
        q(i, j) = 2.0 * v / top - 1.0;
      }
    }
  }
  if (tanh_out != nullptr) *tanh_out = std::move(u);
  return q;
}

Mat decoder_forward(const CodecDecoder& dec, const Mat& latent, SeqShape shape, CodecTape* tape) {
  const bool keep = tape != nullptr;
  Mat h = dec.in_proj.forward(latent, shape, keep ? &tape->d_in : nullptr);
  SeqShape s1{shape.batch, dec.up1.out_length(shape.length)};
  h = dec.up1.forward(h, shape, keep ? &tape->d_up1 : nullptr);
  h = dec.res1.forward(h, s1, keep ? &tape->d_res1 : nullptr);
  SeqShape s2{shape.batch, dec.up2.out_length(s1.length)};
  h = dec.up2.forward(h, s1, keep ? &tape->d_up2 : nullptr);
  h = dec.res2.forward(h, s2, keep ? &tape->d_res2 : nullptr);
  return dec.out_proj.forward(h, s2, keep ? &tape->d_out : nullptr);
}

Mat encoder_forward(const CodecEncoder& enc, const Mat& x, SeqShape shape, CodecTape* tape,
                    SeqShape* latent_shape) {
  const bool keep = tape != nullptr;
  Mat h = enc.in_proj.forward(x, shape, keep ? &tape->e_in : nullptr);
  SeqShape s1{shape.batch, enc.down1.out_length(shape.length)};
  h = enc.down1.forward(h, shape, keep ? &tape->e_down1 : nullptr);
  h = enc.res1.forward(h, s1, keep ? &tape->e_res1 : nullptr);
  SeqShape s2{shape.batch, enc.down2.out_length(s1.length)};
  h = enc.down2.forward(h, s1, keep ? &tape->e_down2 : nullptr);
  h = enc.res2.forward(h, s2, keep ? &tape->e_res2 : nullptr);
  *latent_shape = s2;
  return enc.out_proj.forward(h, s2, keep ? &tape->e_out : nullptr);
}

void check_features(const Mat& features, const CodecConfig& config) {
  if (features.rows() != config.input_dim) {
    throw DimensionError(fmt::format("codec expects {} feature rows, got {}", config.input_dim,
                                     features.rows()));
  }
  if (features.cols() % config.downsample != 0) {
    throw LengthError(fmt::format("window of {} frames is not a multiple of downsample {}",
                                  features.cols(), config.downsample));
  }
}

}  // namespace

void CodecConfig::validate() const {
  if (levels.empty()) throw ConfigError("codec needs at least one latent dimension");
  for (int l : levels) {
    if (l < 2) throw ConfigError("quantization levels must be >= 2");
  }
  if (input_dim < 1) throw ConfigError("input_dim must be positive");
  if (downsample != 2 && downsample != 4) throw ConfigError("downsample must be 2 or 4");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigError("kernel_size must be odd");
  if (residual_kernel < 1 || residual_kernel % 2 == 0) {
    throw ConfigError("residual_kernel must be odd");
  }
  if (hidden_channels < 2 || hidden_channels % 2 != 0) {
    throw ConfigError("hidden_channels must be even and >= 2");
  }
  if (expansion < 1) throw ConfigError("expansion must be >= 1");
  if (use_norm) {
    if (group_norm_groups < 1 || (hidden_channels / 2) % group_norm_groups != 0) {
      throw ConfigError("group_norm_groups must divide hidden_channels / 2");
    }
  }
}

CodecConfig CodecConfig::music() {
  CodecConfig c;
  c.levels = {8, 8, 8, 4, 3};
  c.input_dim = 35;
  return c;
}

void CodecEncoder::collect(std::vector<Mat*>& out) {
  in_proj.collect(out);
  down1.collect(out);
  res1.collect(out);
  down2.collect(out);
  res2.collect(out);
  out_proj.collect(out);
}

void CodecDecoder::collect(std::vector<Mat*>& out) {
  in_proj.collect(out);
  up1.collect(out);
  res1.collect(out);
  up2.collect(out);
  res2.collect(out);
  out_proj.collect(out);
}

std::vector<Mat*> CodecParams::tensors() {
  std::vector<Mat*> out;
  encoder.collect(out);
  decoder.collect(out);
  return out;
}

std::vector<const Mat*> CodecParams::tensors() const {
  auto mutable_view = const_cast<CodecParams*>(this)->tensors();
  return {mutable_view.begin(), mutable_view.end()};
}

std::size_t CodecParams::parameter_count() const {
  std::size_t n = 0;
  for (const Mat* t : tensors()) n += static_cast<std::size_t>(t->size());
  return n;
}

CodecParams init_codec(const CodecConfig& config, std::uint64_t seed,
                       bool zero_output_projection) {
  config.validate();
  const int narrow = config.hidden_channels / 2;
  const int wide = config.hidden_channels;
  const int k = config.kernel_size;
  const auto [s1, s2] = block_strides(config.downsample);
  auto res = [&](int channels) {
    return nn::ResBlock::make(channels, config.residual_kernel, config.expansion,
                              config.group_norm_groups, config.use_norm, config.activation);
  };

  CodecParams p;
  p.config = config;
  p.encoder.in_proj = nn::Conv1d::make(config.input_dim, narrow, 1, 1, 0, 0);
  p.encoder.down1 = strided_conv(narrow, narrow, k, s1);
  p.encoder.res1 = res(narrow);
  p.encoder.down2 = strided_conv(narrow, wide, k, s2);
  p.encoder.res2 = res(wide);
  p.encoder.out_proj = nn::Conv1d::make(wide, config.latent_dim(), 1, 1, 0, 0);

  p.decoder.in_proj = nn::Conv1d::make(config.latent_dim(), wide, 1, 1, 0, 0);
  p.decoder.up1 = upsample_conv(wide, wide, k, s2);
  p.decoder.res1 = res(wide);
  p.decoder.up2 = upsample_conv(wide, narrow, k, s1);
  p.decoder.res2 = res(narrow);
  p.decoder.out_proj = nn::Conv1d::make(narrow, config.input_dim, 1, 1, 0, 0);

  Rng rng = make_rng(seed);
  auto init_conv = [&](nn::Conv1d& c, double gain) {
    nn::init_weight(c.weight, c.in * c.kernel, gain, rng);
  };
  auto init_block = [&](nn::ResBlock& r) {
    init_conv(r.conv, 0.5);
    init_conv(r.fc1, 1.0);
    init_conv(r.fc2, 0.5);
  };
  init_conv(p.encoder.in_proj, 1.0);
  init_conv(p.encoder.down1, 1.0);
  init_block(p.encoder.res1);
  init_conv(p.encoder.down2, 1.0);
  init_block(p.encoder.res2);
  init_conv(p.encoder.out_proj, 1.0);
  init_conv(p.decoder.in_proj, 1.0);
  nn::init_weight(p.decoder.up1.weight, p.decoder.up1.in * p.decoder.up1.kernel / p.decoder.up1.stride,
                  1.0, rng);
  init_block(p.decoder.res1);
  nn::init_weight(p.decoder.up2.weight, p.decoder.up2.in * p.decoder.up2.kernel / p.decoder.up2.stride,
                  1.0, rng);
  init_block(p.decoder.res2);
  if (!zero_output_projection) init_conv(p.decoder.out_proj, 1.0);
  return p;
}

Mat codec_forward(const CodecParams& params, const Mat& x, SeqShape shape, QuantMode mode,
                  CodecTape* tape) {
  SeqShape latent_shape;
  Mat z = encoder_forward(params.encoder, x, shape, tape, &latent_shape);
  Mat q = quantize_forward(z, params.config.levels, mode, tape != nullptr ? &tape->tanh_z : nullptr);
  if (tape != nullptr) {
    tape->in_shape = shape;
    tape->latent_shape = latent_shape;
  }
  return decoder_forward(params.decoder, q, latent_shape, tape);
}

void codec_backward(const CodecParams& params, const CodecTape& tape, const Mat& drecon,
                    CodecParams& grads) {
  const CodecDecoder& dec = params.decoder;
  CodecDecoder& gdec = grads.decoder;
  Mat d = dec.out_proj.backward(drecon, tape.d_out, gdec.out_proj);
  d = dec.res2.backward(d, tape.d_res2, gdec.res2);
  d = dec.up2.backward(d, tape.d_up2, gdec.up2);
  d = dec.res1.backward(d, tape.d_res1, gdec.res1);
  d = dec.up1.backward(d, tape.d_up1, gdec.up1);
  d = dec.in_proj.backward(d, tape.d_in, gdec.in_proj);
  // Straight-through: rounding passes the gradient unchanged, tanh does not.
  d = d.array() * (1.0 - tape.tanh_z.array().square());
  const CodecEncoder& enc = params.encoder;
  CodecEncoder& genc = grads.encoder;
  d = enc.out_proj.backward(d, tape.e_out, genc.out_proj);
  d = enc.res2.backward(d, tape.e_res2, genc.res2);
  d = enc.down2.backward(d, tape.e_down2, genc.down2);
  d = enc.res1.backward(d, tape.e_res1, genc.res1);
  d = enc.down1.backward(d, tape.e_down1, genc.down1);
  enc.in_proj.backward(d, tape.e_in, genc.in_proj);
}

Mat encode_latent(const Mat& features, const CodecParams& params) {
  check_features(features, params.config);
  SeqShape latent_shape;
  return encoder_forward(params.encoder, features,
                         SeqShape{1, static_cast<int>(features.cols())}, nullptr, &latent_shape);
}

std::vector<TokenId> encode(const Mat& features, const CodecParams& params) {
  const Mat z = encode_latent(features, params);
  const Levels& levels = params.config.levels;
  std::vector<TokenId> tokens(static_cast<std::size_t>(z.cols()));
  std::vector<double> column(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index t = 0; t < z.cols(); ++t) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) column[static_cast<std::size_t>(i)] = z(i, t);
    tokens[static_cast<std::size_t>(t)] = code_index(fsq_quantize(column, levels), levels);
  }
  return tokens;
}

std::vector<double> token_embedding(TokenId token, const Levels& levels) {
  return dequantize(index_code(token, levels), levels);
}

Mat decode(std::span<const TokenId> tokens, const CodecParams& params) {
  const CodecConfig& config = params.config;
  if (tokens.empty()) return Mat(config.input_dim, 0);
  Mat latent(config.latent_dim(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const auto e = token_embedding(tokens[t], config.levels);
    for (std::size_t i = 0; i < e.size(); ++i) {
      latent(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = e[i];
    }
  }
  return decoder_forward(params.decoder, latent,
                         SeqShape{1, static_cast<int>(tokens.size())}, nullptr);
}

Mat pad_to_multiple(const Mat& features, int multiple) {
  const Eigen::Index n = features.cols();
  if (n == 0) throw LengthError("cannot pad an empty window");
  const Eigen::Index padded = (n + multiple - 1) / multiple * multiple;
  Mat out(features.rows(), padded);
  out.leftCols(n) = features;
  for (Eigen::Index j = n; j < padded; ++j) out.col(j) = features.col(n - 1);
  return out;
}

Mat roundtrip(const Mat& features, const CodecParams& params) {
  const Mat padded = pad_to_multiple(features, params.config.downsample);
  const auto tokens = encode(padded, params);
  return decode(tokens, params).leftCols(features.cols());
}

}  // namespace ua
