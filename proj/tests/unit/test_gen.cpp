#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "ua/common/errors.hpp"
#include "ua/gen/layout.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/gen/session.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {
namespace {

const TokenId kA = kMotionStart + 5;
const TokenId kB = kMotionStart + 9;

std::vector<std::vector<TokenId>> abab_corpus() {
  return std::vector<std::vector<TokenId>>(50, {kSom, kA, kB, kA, kB, kEom});
}

// ---- layout ----------------------------------------------------------------

TEST(Layout, NoConditions) {
  Rng rng = make_rng(1);
  const std::vector<TokenId> motion{0, 1};
  auto layout = assemble({}, motion, 10, rng);
  EXPECT_EQ(layout.flatten(), (std::vector<TokenId>{kSom, kMotionStart, kMotionStart + 1, kEom}));
}

TEST(Layout, WindowedMusicStartUniform) {
  std::vector<TokenId> music(100);
  std::iota(music.begin(), music.end(), 0);
  Conditions c;
  c.music = music;
  std::vector<int> hits(71, 0);
  for (std::uint64_t seed = 0; seed < 7100; ++seed) {
    Rng rng = make_rng(seed);
    auto layout = assemble(c, std::vector<TokenId>{3}, 30, rng);
    ASSERT_EQ(layout.conditions.size(), 1u);
    const auto& seg = layout.conditions[0].tokens;
    ASSERT_EQ(seg.size(), 30u);
    const TokenId start = seg[0] - kMusicStart;
    ASSERT_GE(start, 0);
    ASSERT_LE(start, 70);
    for (std::size_t i = 1; i < seg.size(); ++i) ASSERT_EQ(seg[i], seg[i - 1] + 1);
    ++hits[static_cast<std::size_t>(start)];
  }
  // Chi-square against uniform, 70 degrees of freedom (p = 0.001 critical ~112).
  double chi = 0.0;
  for (int h : hits) chi += (h - 100.0) * (h - 100.0) / 100.0;
  EXPECT_LT(chi, 112.0);
  EXPECT_GT(hits[0], 0);
  EXPECT_GT(hits[70], 0);
}

TEST(Layout, DelimitersBalancedAndParse) {
  Conditions c;
  c.text = std::vector<TokenId>{4, 5, 6};
  c.music = std::vector<TokenId>(60, 7);
  c.trajectory = std::vector<TokenId>(60, 30);
  Rng rng = make_rng(2);
  auto layout = assemble(c, std::vector<TokenId>{1, 2, 3}, 50, rng);
  auto flat = layout.flatten();
  for (TokenId open : {kTextOpen, kMusicOpen, kTrajectoryOpen}) {
    EXPECT_EQ(std::count(flat.begin(), flat.end(), open), 1);
    EXPECT_EQ(std::count(flat.begin(), flat.end(), open + 1), 1);
    EXPECT_LT(std::find(flat.begin(), flat.end(), open), std::find(flat.begin(), flat.end(), open + 1));
  }
  EXPECT_EQ(std::count(flat.begin(), flat.end(), kEom), 1);
  EXPECT_EQ(flat.back(), kEom);
  EXPECT_EQ(parse_layout(flat), layout);
  EXPECT_EQ(layout.conditions[0].tokens.size(), 3u);
}

TEST(Layout, Errors) {
  Conditions c;
  c.music = std::vector<TokenId>(10, 1);
  Rng rng = make_rng(3);
  EXPECT_THROW(assemble(c, std::vector<TokenId>{}, 11, rng), PreconditionError);
  const std::vector<TokenId> unbalanced{kTextOpen, 5, kSom, kA, kEom};
  EXPECT_THROW(parse_layout(unbalanced), ParseError);
  const std::vector<TokenId> no_eom{kSom, kA};
  EXPECT_THROW(parse_layout(no_eom), ParseError);
  const std::vector<TokenId> text_after{kSom, kA, 12, kEom};
  EXPECT_THROW(parse_layout(text_after), ParseError);
}

TEST(Layout, CorpusFileRoundTrip) {
  SyntheticTokenOptions o;
  o.num_sequences = 5;
  auto corpus = synthetic_token_corpus(o);
  std::stringstream ss;
  write_token_corpus(ss, corpus.layouts);
  EXPECT_EQ(read_token_corpus(ss), corpus.layouts);
}

// ---- n-gram ----------------------------------------------------------------

TEST(Ngram, CountingOracle) {
  auto model = NgramModel::train(abab_corpus(), 2);
  const std::vector<TokenId> ctx{kA};
  EXPECT_GT(model.probability(ctx, kB), 0.9);
}

TEST(Ngram, UnseenContextBacksOff) {
  auto model = NgramModel::train(abab_corpus(), 3);
  const std::vector<TokenId> unseen{17, 18};
  const double pa = model.probability(unseen, kA);
  const double pz = model.probability(unseen, 12345);
  EXPECT_GT(pz, 0.0);
  EXPECT_GT(pa, pz);  // unigram mass survives the backoff
}

TEST(Ngram, DistributionSumsToOne) {
  auto model = NgramModel::train(abab_corpus(), 4);
  for (const std::vector<TokenId>& ctx :
       {std::vector<TokenId>{}, {kA}, {kSom, kA}, {kA, kB, kA}, {1, 2, 3}, {kB, kEom, kSom}}) {
    auto p = model.distribution(ctx);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_GT(*std::min_element(p.begin(), p.end()), 0.0);
  }
}

TEST(Ngram, GreedyFollowsCounts) {
  auto model = NgramModel::train(abab_corpus(), 2);
  Rng rng = make_rng(0);
  const std::vector<TokenId> ctx{kSom, kA};
  const Sample s = next_token(model, ctx, rng, 1e-9);
  EXPECT_EQ(s.token, kB);
  EXPECT_GT(s.probability, 0.0);
  EXPECT_LE(s.probability, 1.0);
}

TEST(Ngram, GreedyTieBreaksToSmallestId) {
  UniformModel uniform;
  Rng rng = make_rng(0);
  const std::vector<TokenId> cand{900, 17, 400};
  EXPECT_EQ(next_token(uniform, {}, rng, 1e-7, cand).token, 17);
}

TEST(Ngram, SeededSamplingReproducible) {
  auto model = NgramModel::train(abab_corpus(), 2);
  Rng a = make_rng(9);
  Rng b = make_rng(9);
  const std::vector<TokenId> ctx{kA};
  for (int i = 0; i < 50; ++i) {
    const Sample sa = next_token(model, ctx, a, 1.5, motion_candidates());
    const Sample sb = next_token(model, ctx, b, 1.5, motion_candidates());
    ASSERT_EQ(sa.token, sb.token);
    ASSERT_GT(sa.probability, 0.0);
    ASSERT_LE(sa.probability, 1.0);
  }
}

TEST(Ngram, TemperaturePrecondition) {
  UniformModel uniform;
  Rng rng = make_rng(0);
  EXPECT_THROW(next_token(uniform, {}, rng, 0.0), PreconditionError);
  EXPECT_THROW(next_token(uniform, {}, rng, -1.0), PreconditionError);
}

TEST(Ngram, SaveLoadPreservesScores) {
  auto model = NgramModel::train(abab_corpus(), 3);
  std::stringstream ss;
  model.save(ss);
  auto loaded = NgramModel::load(ss);
  EXPECT_EQ(loaded.order(), 3);
  const std::vector<TokenId> ctx{kSom, kA};
  for (TokenId w : {kA, kB, kEom, TokenId{3}}) EXPECT_EQ(loaded.probability(ctx, w), model.probability(ctx, w));
}

// ---- perplexity -----------------------------------------------------------

TEST(Perplexity, UniformIsVocabularySize) {
  SyntheticTokenOptions o;
  o.num_sequences = 10;
  auto corpus = synthetic_token_corpus(o);
  EXPECT_NEAR(perplexity(UniformModel{}, corpus.layouts), static_cast<double>(kVocabSize), 1e-6);
}

TEST(Perplexity, DeterministicCorpusNearOne) {
  std::vector<SequenceLayout> layouts(50, parse_layout(std::vector<TokenId>{kSom, kA, kB, kA, kB, kEom}));
  // Order 4 sees enough context to make every motion position unambiguous.
  auto model = NgramModel::train(layouts, 4);
  const double ppl = perplexity(model, layouts);
  EXPECT_LT(ppl, 1.05);
  EXPECT_GE(ppl, 1.0);
}

TEST(Perplexity, TrainingSetBelowUniformAndBounded) {
  auto corpus = synthetic_token_corpus({});
  auto model = NgramModel::train(corpus.layouts);
  const double ppl = perplexity(model, corpus.layouts);
  EXPECT_LT(ppl, static_cast<double>(kVocabSize));
  EXPECT_LT(ppl, perplexity(UniformModel{}, corpus.layouts));
}

// ---- generation ------------------------------------------------------------

TEST(Generate, SingleTokenModel) {
  const TokenId m = kMotionStart + 77;
  auto model = NgramModel::train(std::vector<std::vector<TokenId>>(20, {kSom, m, kEom}), 3);
  SessionOptions opt;
  opt.temperature = 1e-9;
  GenerationSession session(opt);
  EXPECT_EQ(generate(model, session, {}), std::vector<TokenId>{77});
}

TEST(Generate, CapWithoutEom) {
  // A model that never saw EOM still has floor mass on it; greedy decoding
  // keeps choosing the repeated motion id.
  auto model = NgramModel::train(std::vector<std::vector<TokenId>>(5, std::vector<TokenId>(50, kA)), 2);
  SessionOptions opt;
  opt.max_length = 5;
  opt.temperature = 1e-9;
  GenerationSession session(opt);
  EXPECT_EQ(generate(model, session, {}).size(), 5u);
}

TEST(Generate, OnlyMotionIdsEmitted) {
  auto corpus = synthetic_token_corpus({});
  auto model = NgramModel::train(corpus.layouts);
  SessionOptions opt;
  opt.max_length = 80;
  opt.temperature = 2.0;  // flatten so masked-out mass would show up
  GenerationSession session(opt);
  for (int i = 0; i < 20; ++i) {
    Conditions c;
    c.text = tokenize_text(corpus.instructions[static_cast<std::size_t>(i)], corpus.vocab);
    auto out = generate(model, session, c);
    EXPECT_LE(out.size(), 80u);
    for (TokenId t : out) ASSERT_TRUE(t >= 0 && t < kMotionSize);
  }
}

TEST(Generate, HistoryCarriedIntoSecondInstruction) {
  auto corpus = synthetic_token_corpus({});
  auto model = NgramModel::train(corpus.layouts);
  SessionOptions opt;
  opt.seed = 4;
  opt.max_length = 40;
  GenerationSession session(opt);
  Conditions c1;
  c1.text = tokenize_text("walk forward", corpus.vocab);
  auto first = generate(model, session, c1);
  ASSERT_GE(first.size(), 10u);
  Conditions c2;
  c2.text = tokenize_text("wave left", corpus.vocab);
  generate(model, session, c2);
  const auto& prompt = session.last_prompt();
  ASSERT_GE(prompt.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(prompt[i], first[first.size() - 10 + i] + kMotionStart);
  }
  EXPECT_EQ(prompt[10], kTextOpen);
}

TEST(Generate, ShortPreviousOutputCarriesAll) {
  const TokenId m = kMotionStart + 3;
  auto model = NgramModel::train(std::vector<std::vector<TokenId>>(20, {kSom, m, m, m, kEom}), 4);
  SessionOptions opt;
  opt.temperature = 1e-9;
  GenerationSession session(opt);
  auto first = generate(model, session, {});
  ASSERT_EQ(first.size(), 3u);
  generate(model, session, {});
  const auto& prompt = session.last_prompt();
  EXPECT_EQ(std::vector<TokenId>(prompt.begin(), prompt.begin() + 3), std::vector<TokenId>(3, m));
  EXPECT_EQ(prompt[3], kSom);
}

TEST(Generate, ZeroMaxLengthRejected) {
  SessionOptions opt;
  opt.max_length = 0;
  GenerationSession session(opt);
  EXPECT_THROW(generate(UniformModel{}, session, {}), PreconditionError);
}

TEST(Generate, GreedyIsDeterministic) {
  auto corpus = synthetic_token_corpus({});
  auto model = NgramModel::train(corpus.layouts);
  SessionOptions opt;
  opt.temperature = 1e-9;
  opt.max_length = 60;
  Conditions c;
  c.text = tokenize_text("run quickly", corpus.vocab);
  GenerationSession a(opt);
  GenerationSession b(opt);
  EXPECT_EQ(generate(model, a, c), generate(model, b, c));
}

}  // namespace
}  // namespace ua
