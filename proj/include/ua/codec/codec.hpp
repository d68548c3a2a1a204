#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ua/codec/fsq.hpp"
#include "ua/codec/layers.hpp"

namespace ua {

using TokenId = std::int64_t;

struct CodecConfig {
  Levels levels{8, 8, 8, 6, 5};
  int input_dim = 29;
  int hidden_channels = 256;
  int kernel_size = 7;
  int downsample = 2;
  int group_norm_groups = 8;
  int expansion = 2;
  int residual_kernel = 3;
  bool use_norm = true;
  nn::Activation activation = nn::Activation::kGelu;

  int latent_dim() const { return static_cast<int>(levels.size()); }
  std::int64_t codebook_size() const { return ua::codebook_size(levels); }
  // Throws ConfigError on an invalid combination.
  void validate() const;

  static CodecConfig motion() { return {}; }
  // 8*8*8*4*3 = 6,144 codes over the 35-wide music feature frame.
  static CodecConfig music();

  bool operator==(const CodecConfig&) const = default;
};

// Encoder: input projection, two strided conv blocks (each a strided conv and
// a residual block, channel width hidden/2 then hidden), latent projection.
struct CodecEncoder {
  nn::Conv1d in_proj;
  nn::Conv1d down1;
  nn::ResBlock res1;
  nn::Conv1d down2;
  nn::ResBlock res2;
  nn::Conv1d out_proj;

  void collect(std::vector<nn::Mat*>& out);
};

// Decoder mirrors the encoder with transposed convolutions.
struct CodecDecoder {
  nn::Conv1d in_proj;
  nn::ConvTranspose1d up1;
  nn::ResBlock res1;
  nn::ConvTranspose1d up2;
  nn::ResBlock res2;
  nn::Conv1d out_proj;

  void collect(std::vector<nn::Mat*>& out);
};

struct CodecParams {
  CodecConfig config;
  CodecEncoder encoder;
  CodecDecoder decoder;
  bool trained = false;

  // Every tensor in declaration order (encoder first). This order defines
  // the parameter file layout.
  std::vector<nn::Mat*> tensors();
  std::vector<const nn::Mat*> tensors() const;
  std::size_t parameter_count() const;
};

// Allocates parameters for `config`. The decoder output projection starts at
// zero so an untrained codec reconstructs every input as zero.
CodecParams init_codec(const CodecConfig& config, std::uint64_t seed,
                       bool zero_output_projection = true);

// Features are (input_dim x N), one column per frame. Throws LengthError if
// N is not a multiple of the downsample factor, DimensionError on a width
// mismatch.
std::vector<TokenId> encode(const nn::Mat& features, const CodecParams& params);
// M tokens -> (input_dim x M*downsample). Throws RangeError on an id outside
// the codebook.
nn::Mat decode(std::span<const TokenId> tokens, const CodecParams& params);

// Normalized dequantized latent of a token, the embedding the decoders consume.
std::vector<double> token_embedding(TokenId token, const Levels& levels);

// Repeats the last column until the width is a multiple of `multiple`.
nn::Mat pad_to_multiple(const nn::Mat& features, int multiple);

// decode(encode(x)) for any length; pads with the last frame and trims back.
nn::Mat roundtrip(const nn::Mat& features, const CodecParams& params);

// ---------------------------------------------------------------------------
// Training-level access: forward with caches and the matching backward.

enum class QuantMode {
  kRound,  // FSQ rounding, straight-through gradient
  kSoft,   // rounding skipped (smooth surrogate used by gradient checks)
};

struct CodecTape {
  nn::SeqShape in_shape;
  nn::SeqShape latent_shape;
  nn::Conv1d::Cache e_in, e_down1, e_down2, e_out;
  nn::ResBlock::Cache e_res1, e_res2;
  nn::Mat tanh_z;
  nn::Conv1d::Cache d_in, d_out;
  nn::ConvTranspose1d::Cache d_up1, d_up2;
  nn::ResBlock::Cache d_res1, d_res2;
};

// x is (input_dim x batch*length). Returns the reconstruction.
nn::Mat codec_forward(const CodecParams& params, const nn::Mat& x, nn::SeqShape shape,
                      QuantMode mode, CodecTape* tape);
// Accumulates parameter gradients of a loss with gradient `drecon` w.r.t.
// the reconstruction.
void codec_backward(const CodecParams& params, const CodecTape& tape, const nn::Mat& drecon,
                    CodecParams& grads);

// Continuous encoder output z, (latent_dim x N/downsample).
nn::Mat encode_latent(const nn::Mat& features, const CodecParams& params);

}  // namespace ua
