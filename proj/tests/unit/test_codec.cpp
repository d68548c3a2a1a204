#include <gtest/gtest.h>

#include <sstream>

#include "ua/codec/codec.hpp"
#include "ua/codec/params_io.hpp"
#include "ua/codec/train.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"
#include "ua/motion/synthetic.hpp"

namespace ua {
namespace {

using nn::Mat;

CodecConfig small_config() {
  CodecConfig c;
  c.hidden_channels = 16;
  c.group_norm_groups = 4;
  return c;
}

Mat random_features(int rows, int cols, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng) * 2.0 - 1.0;
  return m;
}

CodecParams random_codec(const CodecConfig& cfg, std::uint64_t seed) {
  CodecParams p = init_codec(cfg, seed, false);
  Rng rng = make_rng(seed, 9);
  // Perturb norms and biases away from their identity initialisation.
  for (Mat* t : p.tensors()) {
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += 0.1 * (uniform01(rng) - 0.5);
  }
  return p;
}

TEST(CodecConfig, Defaults) {
  CodecConfig c;
  EXPECT_EQ(c.codebook_size(), 15360);
  EXPECT_EQ(c.latent_dim(), 5);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(CodecConfig::music().codebook_size(), 6144);
  c.downsample = 3;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Codec, TwoFramesGiveOneToken) {
  CodecParams p = random_codec(small_config(), 1);
  EXPECT_EQ(encode(random_features(29, 2, 2), p).size(), 1u);
}

TEST(Codec, TemporalContract) {
  for (int ds : {2, 4}) {
    CodecConfig cfg = small_config();
    cfg.downsample = ds;
    CodecParams p = random_codec(cfg, 3);
    for (int n : {ds, 2 * ds, 5 * ds, 24}) {
      if (n % ds != 0) continue;
      Mat x = random_features(29, n, static_cast<std::uint64_t>(n));
      auto tokens = encode(x, p);
      ASSERT_EQ(tokens.size(), static_cast<std::size_t>(n / ds));
      for (TokenId t : tokens) ASSERT_TRUE(t >= 0 && t < 15360);
      Mat y = decode(tokens, p);
      EXPECT_EQ(y.rows(), 29);
      EXPECT_EQ(y.cols(), n);
    }
  }
}

TEST(Codec, EncodeDeterministic) {
  CodecParams p = random_codec(small_config(), 4);
  Mat x = random_features(29, 16, 5);
  EXPECT_EQ(encode(x, p), encode(x, p));
}

TEST(Codec, EmptyDecode) {
  CodecParams p = random_codec(small_config(), 4);
  EXPECT_EQ(decode(std::vector<TokenId>{}, p).cols(), 0);
}

TEST(Codec, Errors) {
  CodecParams p = random_codec(small_config(), 4);
  EXPECT_THROW(encode(random_features(29, 3, 1), p), LengthError);
  EXPECT_THROW(encode(random_features(28, 4, 1), p), DimensionError);
  const std::vector<TokenId> bad{15360};
  EXPECT_THROW(decode(bad, p), RangeError);
}

TEST(Codec, RoundtripKeepsShapeForAnyLength) {
  CodecParams p = random_codec(small_config(), 6);
  Mat x = random_features(29, 7, 7);
  Mat y = roundtrip(x, p);
  EXPECT_EQ(y.rows(), x.rows());
  EXPECT_EQ(y.cols(), x.cols());
}

TEST(Codec, MusicCodecShapes) {
  CodecConfig cfg = CodecConfig::music();
  cfg.hidden_channels = 16;
  cfg.group_norm_groups = 4;
  CodecParams p = random_codec(cfg, 8);
  auto tokens = encode(random_features(35, 8, 9), p);
  EXPECT_EQ(tokens.size(), 4u);
  for (TokenId t : tokens) EXPECT_LT(t, 6144);
}

TEST(ParamsIo, RoundTripBitExact) {
  CodecParams p = random_codec(small_config(), 10);
  round_to_float(p);
  std::stringstream ss;
  save_codec(ss, p);
  EXPECT_EQ(ss.str().rfind("UACODEC 1\n", 0), 0u);
  CodecParams q = load_codec(ss);
  EXPECT_EQ(q.config, p.config);
  auto a = p.tensors();
  auto b = q.tensors();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(*a[i] == *b[i]);
  Mat x = random_features(29, 12, 11);
  EXPECT_EQ(encode(x, p), encode(x, q));
}

TEST(ParamsIo, ChecksumDetectsCorruption) {
  CodecParams p = random_codec(small_config(), 12);
  std::stringstream ss;
  save_codec(ss, p);
  std::string bytes = ss.str();
  bytes[bytes.size() / 2] ^= 0x5a;
  std::stringstream corrupt(bytes);
  EXPECT_THROW(load_codec(corrupt), ParseError);
  std::stringstream truncated(ss.str().substr(0, ss.str().size() - 3));
  EXPECT_THROW(load_codec(truncated), ParseError);
  std::stringstream wrong("UACODEC 2\n");
  EXPECT_THROW(load_codec(wrong), ParseError);
}

TEST(GradientCheck, LinearConfigExact) {
  CodecConfig cfg;
  cfg.hidden_channels = 8;
  cfg.kernel_size = 1;
  cfg.residual_kernel = 1;
  cfg.use_norm = false;
  cfg.activation = nn::Activation::kIdentity;
  CodecParams p = random_codec(cfg, 13);
  Mat probe = random_features(29, 2 * 8, 14);
  EXPECT_LT(gradient_check(p, probe, {2, 8}, 1e-4, 200), 1e-7);
}

TEST(GradientCheck, DefaultArchitectureSmallWidths) {
  for (int ds : {2, 4}) {
    CodecConfig cfg = small_config();
    cfg.downsample = ds;
    CodecParams p = random_codec(cfg, 15);
    Mat probe = random_features(29, 2 * 8, 16);
    EXPECT_LT(gradient_check(p, probe, {2, 8}, 1e-5, 200), 1e-4) << "downsample " << ds;
  }
}

TEST(GradientCheck, EpsilonPrecondition) {
  CodecParams p = random_codec(small_config(), 17);
  Mat probe = random_features(29, 8, 18);
  EXPECT_THROW(gradient_check(p, probe, {1, 8}, 0.0), PreconditionError);
  EXPECT_THROW(gradient_check(p, probe, {1, 8}, 1e-2), PreconditionError);
}

TEST(TrainCodec, StepZeroLossIsMeanSquaredInput) {
  auto corpus = constant_corpus(4, 32, 3);
  TrainOptions opts;
  opts.steps = 1;
  opts.window = 32;
  TrainResult r = train_codec(corpus, small_config(), opts);
  const Mat x = dof_matrix(corpus[0]);
  EXPECT_NEAR(r.step0_loss, x.squaredNorm() / static_cast<double>(x.size()), 1e-12);
  EXPECT_NEAR(r.initial_loss, x.squaredNorm() / static_cast<double>(x.size()), 1e-12);
}

TEST(TrainCodec, DeterministicUnderSeed) {
  SinusoidCorpusOptions co;
  co.num_sequences = 16;
  auto corpus = sinusoid_corpus(co);
  TrainOptions opts;
  opts.steps = 30;
  opts.steps_per_epoch = 10;
  opts.seed = 5;
  TrainResult a = train_codec(corpus, small_config(), opts);
  TrainResult b = train_codec(corpus, small_config(), opts);
  ASSERT_EQ(a.epoch_loss.size(), 3u);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(TrainCodec, ConstantCorpusWithinDefaultBudget) {
  auto corpus = constant_corpus(8, 64, 21);
  TrainResult r = train_codec(corpus, small_config(), TrainOptions{});
  EXPECT_LT(r.final_loss, 1e-3);
}

TEST(TrainCodec, SinusoidCorpusLossDecreases) {
  SinusoidCorpusOptions co;
  co.num_sequences = 32;
  auto corpus = sinusoid_corpus(co);
  TrainResult r = train_codec(corpus, small_config(), TrainOptions{});
  EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(TrainCodec, EmptyCorpusRejected) {
  std::vector<MotionSequence> none;
  EXPECT_THROW(train_codec(none, small_config(), TrainOptions{}), PreconditionError);
}

TEST(TrainCodec, DivergenceReportsStep) {
  SinusoidCorpusOptions co;
  co.num_sequences = 8;
  auto corpus = sinusoid_corpus(co);
  TrainOptions opts;
  opts.learning_rate = 1e12;
  opts.steps = 50;
  try {
    train_codec(corpus, small_config(), opts);
    FAIL() << "expected divergence";
  } catch (const TrainingError& e) {
    EXPECT_GT(e.step(), 0u);
  }
}

}  // namespace
}  // namespace ua
