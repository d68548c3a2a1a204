// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include <fmt/format.h>

#include "ua/augment/gait.hpp"
#include "ua/augment/segment.hpp"
#include "ua/augment/synthesize.hpp"
#include "ua/causal/causal_decoder.hpp"
#include "ua/checks/properties.hpp"
#include "ua/codec/codec.hpp"
#include "ua/codec/train.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/logging.hpp"
#include "ua/common/rng.hpp"
#include "ua/eval/features.hpp"
#include "ua/eval/metrics.hpp"
#include "ua/eval/pd.hpp"
#include "ua/eval/reward.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/gen/session.hpp"
#include "ua/motion/kinematics.hpp"
#include "ua/motion/synthetic.hpp"
#include "ua/robust/sweep.hpp"
#include "ua/stream/client.hpp"
#include "ua/stream/pipeline.hpp"
#include "ua/stream/server.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {
namespace {

// Pinned tolerances and budgets.
constexpr double kFsqBudgetS = 1.0;
constexpr double kGradBudgetS = 30.0;
constexpr double kCodecRmsBound = 0.10;  // rad, per DOF
constexpr int kCodecMaxSteps = 20000;
constexpr double kCodecBudgetS = 15 * 60.0;
constexpr std::size_t kCausalSequences = 1000;
constexpr double kCausalBudgetS = 60.0;
constexpr double kDenoiseFraction4 = 0.90;
constexpr double kDenoiseFraction8 = 0.95;
constexpr double kDenoiseBudgetS = 5 * 60.0;
constexpr double kFirstFrameBoundMs = 500.0;
constexpr double kTickMs = 20.0;
constexpr double kTickToleranceMs = 5.0;
constexpr double kOnTimeFraction = 0.95;
constexpr double kSessionS = 60.0;
constexpr double kStreamBudgetS = 3 * 60.0;
constexpr double kMatchMinutes = 30.0;
constexpr double kMatchBudgetS = 5 * 60.0;
constexpr double kFidTolerance = 1e-9;
constexpr double kOvershootBound = 0.01;
constexpr double kRewardZeroTotal = 4.5;
constexpr double kMetricsBudgetS = 60.0;
constexpr double kGeneratorBudgetS = 60.0;

// Codec acceptance run.
constexpr std::size_t kCorpusSequences = 1000;
constexpr int kCodecHidden = 64;
constexpr int kCodecSteps = 4000;
constexpr double kCodecLearningRate = 0.002;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Line {
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

std::vector<Line> g_lines;

void report(Line line) {
  std::printf("%s %s: %s (%.2f s)\n", line.passed ? "PASS" : "FAIL", line.name.c_str(),
              line.detail.c_str(), line.seconds);
  std::fflush(stdout);
  g_lines.push_back(std::move(line));
}

// Runs one criterion; an exception counts as a failure.
void criterion(const std::string& name, const std::function<Line()>& body) {
  const auto t0 = Clock::now();
  try {
    Line l = body();
    l.name = name;
    report(std::move(l));
  } catch (const std::exception& e) {
    report({name, false, fmt::format("exception: {}", e.what()), seconds_since(t0)});
  }
}

Line from_check(const CheckResult& r, double budget_s, bool extra_ok = true) {
  const bool ok = r.passed && r.seconds < budget_s && extra_ok;
  return {"", ok, fmt::format("{}; budget {} s", r.detail, budget_s), r.seconds};
}

FeatureVector scalar(double x) {
  FeatureVector f(1);
  f(0) = x;
  return f;
}

// Largest per-DOF RMS of decode(encode(x)) - x over the corpus.
double max_dof_rms(std::span<const MotionSequence> corpus, const CodecParams& codec) {
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(kNumDofs);
  double frames = 0.0;
  for (const MotionSequence& s : corpus) {
    const Eigen::MatrixXd x = dof_matrix(s);
    const Eigen::MatrixXd e = roundtrip(x, codec) - x;
    sq += e.rowwise().squaredNorm();
    frames += static_cast<double>(x.cols());
  }
  return std::sqrt((sq / frames).maxCoeff());
}

struct Shared {
  std::vector<MotionSequence> corpus;
  std::optional<CodecParams> codec;
};

Line codec_training(Shared& shared) {
  const auto t0 = Clock::now();
  shared.corpus = sinusoid_corpus({.num_sequences = kCorpusSequences});
  CodecConfig cfg;
  cfg.hidden_channels = kCodecHidden;
  TrainOptions o;
  o.optimizer = Optimizer::kAdam;
  o.learning_rate = kCodecLearningRate;
  o.cosine_decay = true;
  o.steps = kCodecSteps;
  o.seed = 0;
  static_assert(kCodecSteps <= kCodecMaxSteps);
  TrainResult r = train_codec(std::span<const MotionSequence>(shared.corpus), cfg, o);
  shared.codec = std::move(r.params);
  const double rms = max_dof_rms(shared.corpus, *shared.codec);
  const double s = seconds_since(t0);
  return {"", rms <= kCodecRmsBound && s < kCodecBudgetS,
          fmt::format("{} sequences, width {}, {} steps, max per-DOF RMS {:.4f} rad (<= {})",
                      kCorpusSequences, kCodecHidden, kCodecSteps, rms, kCodecRmsBound),
          s};
}

Line denoising(const Shared& shared) {
  const auto t0 = Clock::now();
  if (!shared.codec) throw PreconditionError("no trained codec");
  SweepOptions o;
  o.scales = {1.0, 2.0, 4.0, 8.0};
  o.seed = 0;
  const SweepResult r = sweep(shared.corpus, *shared.codec, o);
  bool raw_increasing = true;
  for (std::size_t i = 1; i < r.points.size(); ++i)
    raw_increasing = raw_increasing && r.points[i].mean_raw > r.points[i - 1].mean_raw;
  double f4 = 0.0, f8 = 0.0;
  std::string means;
  for (const SweepPoint& p : r.points) {
    if (p.scale == 4.0) f4 = p.improved_fraction;
    if (p.scale == 8.0) f8 = p.improved_fraction;
    means += fmt::format(" x{}: raw {:.3f} rt {:.3f};", p.scale, p.mean_raw, p.mean_roundtrip);
  }
  const double s = seconds_since(t0);
  return {"",
          f4 >= kDenoiseFraction4 && f8 >= kDenoiseFraction8 && raw_increasing &&
              s < kDenoiseBudgetS,
          fmt::format("improved x4 {:.1f}% (>= {}%), x8 {:.1f}% (>= {}%), raw increasing {};{}",
                      100 * f4, 100 * kDenoiseFraction4, 100 * f8, 100 * kDenoiseFraction8,
                      raw_increasing ? "yes" : "no", means),
          s};
}

Line streaming(const Shared& shared) {
  const auto t0 = Clock::now();
  if (!shared.codec) throw PreconditionError("no trained codec");
  const SyntheticTokenCorpus tokens = synthetic_token_corpus({});
  auto res = std::make_shared<StreamResources>();
  res->model = std::make_shared<NgramModel>(NgramModel::train(tokens.layouts));
  CausalTrainOptions co;
  co.steps = 300;
  CausalConfig cc = CausalConfig::for_codec(shared.codec->config);
  cc.hidden = 64;
  const std::span<const MotionSequence> head(shared.corpus.data(), 200);
  res->decoder =
      std::make_shared<CausalDecoderParams>(train_causal(*shared.codec, head, cc, co).params);
  res->vocab = std::make_shared<TextVocab>(tokens.vocab);
  res->session.seed = 1;

  StreamServer server(res, {});
  server.start();
  ClientOptions copts;
  copts.server = {"127.0.0.1", server.port()};
  StreamClient client(copts);
  client.connect();

  // Instruction 1 with the latency breakdown, then history into instruction 2.
  PlaybackTicker ticker(client.cache());
  std::uint64_t first = 0;
  const TimingBreakdown t = measure_latency(
      client, Instruction{tokens.instructions[0], std::nullopt, std::nullopt},
      KinematicModel::g1(), &first);
  ticker.start();
  const auto ticker_start = Clock::now();
  if (!client.wait_complete(first, 10000)) throw ProtocolError("first instruction incomplete");
  const auto history = client.status().history;
  const std::uint64_t second =
      client.instruct(Instruction{tokens.instructions[1], std::nullopt, std::nullopt});
  if (!client.wait_complete(second, 10000)) throw ProtocolError("second instruction incomplete");
  const auto prompt = client.status().last_prompt;
  const bool history_ok = history.size() == kHistoryTokens && prompt.size() >= history.size() &&
                          std::equal(history.begin(), history.end(), prompt.begin());

  // Keep the session fed for the rest of the minute.
  std::size_t next = 2;
  while (seconds_since(ticker_start) < kSessionS) {
    if (client.cache().buffered() < 250) {
      client.instruct(Instruction{tokens.instructions[next++ % tokens.instructions.size()],
                                  std::nullopt, std::nullopt});
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
  ticker.stop();
  client.close();
  server.stop();

  const auto rec = ticker.records();
  std::size_t on_time = 0;
  std::size_t held = 0;
  for (std::size_t i = 1; i < rec.size(); ++i)
    if (std::abs(rec[i].wall_ms - rec[i - 1].wall_ms - kTickMs) <= kTickToleranceMs) ++on_time;
  for (const auto& r : rec) held += r.held ? 1 : 0;
  const double fraction =
      rec.size() > 1 ? static_cast<double>(on_time) / static_cast<double>(rec.size() - 1) : 0.0;
  const double s = seconds_since(t0);
  return {"",
          t.total_delay_ms < kFirstFrameBoundMs && fraction >= kOnTimeFraction && history_ok &&
              s < kStreamBudgetS,
          fmt::format("first playable frame {:.1f} ms (< {}; gen {:.1f}, decode {:.2f}, track "
                      "{:.2f}, transmit {:.2f}); {} pops, {:.1f}% at {}+-{} ms (>= {}%), {} held; "
                      "history {} tokens carried {}",
                      t.total_delay_ms, kFirstFrameBoundMs, t.motion_generation_ms,
                      t.token_decode_ms, t.motion_track_ms, t.data_transmission_ms, rec.size(),
                      100 * fraction, kTickMs, kTickToleranceMs, 100 * kOnTimeFraction, held,
                      history.size(), history_ok ? "yes" : "no"),
          s};
}

Line motion_matching() {
  const auto t0 = Clock::now();
  GaitOptions g;
  g.duration_s = 60.0;
  const std::vector<MotionSequence> src{synthetic_gait(g)};
  const auto library = build_library(src);
  SynthesisOptions o;
  o.duration_s = kMatchMinutes * 60.0;
  o.seed = 0;
  const SynthesisResult r = synthesize(library, o);
  // Independent recount of the reuse rule from the chosen clip ids.
  std::size_t reuse = 0;
  for (std::size_t i = 1; i < r.clips.size(); ++i)
    for (std::size_t k = i >= o.reuse_window ? i - o.reuse_window : 0; k < i; ++k)
      if (r.clips[k] == r.clips[i]) ++reuse;
  const double minutes = r.motion.duration() / 60.0;
  const double s = seconds_since(t0);
  return {"",
          minutes >= kMatchMinutes && r.qc.violations() == 0 && reuse == 0 && s < kMatchBudgetS,
          fmt::format("{} clips -> {:.1f} min, {} transitions, violations {} (dof {}, root {}, "
                      "reuse {}, non-finite {}), max dof delta {:.3f}, max root jump {:.4f} m",
                      library.size(), minutes, r.qc.transitions.size(), r.qc.violations() + reuse,
                      r.qc.dof_violations, r.qc.root_violations, r.qc.reuse_violations + reuse,
                      r.qc.non_finite_frames, r.qc.max_dof_delta, r.qc.max_root_jump),
          s};
}

Line metrics_oracle() {
  const auto t0 = Clock::now();
  // 1-D FID: mean shift 1 with equal variance, and variance 1 vs 9.
  const double c = std::sqrt(0.5);
  const std::vector<FeatureVector> a{scalar(-c), scalar(c)};
  const std::vector<FeatureVector> shifted{scalar(1 - c), scalar(1 + c)};
  const std::vector<FeatureVector> wide{scalar(-3 * c), scalar(3 * c)};
  const double fid_shift = fid(a, shifted);
  const double fid_wide = fid(a, wide);
  const double fid_self = fid(a, a);
  const bool fid_ok = std::abs(fid_shift - 1.0) <= kFidTolerance &&
                      std::abs(fid_wide - 4.0) <= kFidTolerance &&
                      std::abs(fid_self) <= kFidTolerance;

  std::vector<FeatureVector> q, cand;
  for (int i = 0; i < 96; ++i) {
    FeatureVector v(2);
    v << 10.0 * i, 0.0;
    q.push_back(v);
    v << 10.0 * i + 0.5, 0.1;
    cand.push_back(v);
  }
  const double sep1 = r_precision(q, cand, 1);
  Rng rng = make_rng(5);
  std::vector<FeatureVector> rq, rc;
  for (int i = 0; i < 96; ++i) {
    FeatureVector v(2);
    v << uniform01(rng), uniform01(rng);
    rq.push_back(v);
    v << uniform01(rng), uniform01(rng);
    rc.push_back(v);
  }
  const double r1 = r_precision(rq, rc, 1), r2 = r_precision(rq, rc, 2), r3 = r_precision(rq, rc, 3);
  const bool rprec_ok = sep1 == 100.0 && r1 <= r2 && r2 <= r3;

  // Unit step on every joint at the default zeta = 2.
  Eigen::MatrixXd step = Eigen::MatrixXd::Zero(kNumDofs, 250);
  step.rightCols(249).setConstant(1.0);
  const TrackResult tr = simulate_track(from_dof_matrix(step, kCanonicalFps));
  double peak = 0.0;
  for (const auto& f : tr.tracked.frames())
    for (std::size_t j = 0; j < kNumDofs; ++j) peak = std::max(peak, f.dofs[j]);
  const double overshoot = peak - 1.0;

  MotionFrame f;
  f.root.position = Vec3(0, 0, 1.0);
  const RewardBreakdown rw =
      reward_terms({f, f, f, f, f.dofs, f.dofs, 1.0 / kCanonicalFps}, KinematicModel::g1());
  const bool reward_ok = rw.total == kRewardZeroTotal;

  const double s = seconds_since(t0);
  return {"",
          fid_ok && rprec_ok && overshoot <= kOvershootBound && reward_ok && s < kMetricsBudgetS,
          fmt::format("fid shift {:.12f} (1), var {:.12f} (4), self {:.1e} (0); r_precision separable@1 {}%, "
                      "random @1/2/3 {:.1f}/{:.1f}/{:.1f}; step overshoot {:.2e} (<= {}); "
                      "zero-error reward {} ({})",
                      fid_shift, fid_wide, fid_self, sep1, r1, r2, r3, std::max(0.0, overshoot),
                      kOvershootBound, rw.total, kRewardZeroTotal),
          s};
}

Line vocabulary() {
  const auto t0 = Clock::now();
  struct Case {
    Modality m;
    TokenId local;
    TokenId global;
  };
  const Case cases[] = {
      {Modality::kText, 0, 0},           {Modality::kText, 130076, 130076},
      {Modality::kSom, 0, 130077},       {Modality::kEom, 0, 130078},
      {Modality::kMotion, 0, 130079},    {Modality::kMotion, 15359, 145438},
      {Modality::kMusic, 0, 145439},     {Modality::kMusic, 6143, 151582},
      {Modality::kTrajectory, 0, 151583}, {Modality::kTrajectory, 59, 151642},
  };
  std::size_t bad = 0;
  for (const Case& c : cases) {
    if (to_global(c.m, c.local) != c.global) ++bad;
    const LocalToken l = from_global(c.global);
    if (l.modality != c.m || l.local != c.local) ++bad;
  }
  bool out_of_range = false;
  try {
    from_global(kVocabSize);
  } catch (const RangeError&) {
    out_of_range = true;
  }
  std::size_t inverse = 0;
  for (TokenId g = 0; g < kVocabSize; ++g) {
    const LocalToken l = from_global(g);
    if (to_global(l.modality, l.local) != g) ++inverse;
  }
  return {"", bad == 0 && inverse == 0 && out_of_range && kVocabSize == 151643,
          fmt::format("{} boundary mismatches, {} inverse mismatches over {} ids, id {} rejected {}",
                      bad, inverse, kVocabSize, kVocabSize, out_of_range ? "yes" : "no"),
          seconds_since(t0)};
}

Line generator() {
  const auto t0 = Clock::now();
  const SyntheticTokenCorpus train = synthetic_token_corpus({.seed = 11});
  const SyntheticTokenCorpus held = synthetic_token_corpus({.num_sequences = 100, .seed = 12});
  const NgramModel model = NgramModel::train(train.layouts);
  const double ppl = perplexity(model, held.layouts);
  const double uniform = perplexity(UniformModel{}, held.layouts);

  SessionOptions so;
  so.max_length = 60;
  so.seed = 3;
  GenerationSession session(so);
  std::size_t by_eom = 0, by_cap = 0, other = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    Conditions c;
    c.text = tokenize_text(train.instructions[i % train.instructions.size()], train.vocab);
    std::size_t streamed = 0;
    const auto out = generate(model, session, c, [&](TokenId) { ++streamed; });
    const bool valid = std::all_of(out.begin(), out.end(),
                                   [](TokenId t) { return t >= 0 && t < kMotionSize; });
    if (!valid || streamed != out.size() || out.size() > so.max_length) {
      ++other;
    } else if (out.size() == so.max_length) {
      ++by_cap;
    } else {
      ++by_eom;
    }
  }
  const double s = seconds_since(t0);
  return {"", ppl < uniform && other == 0 && s < kGeneratorBudgetS,
          fmt::format("held-out perplexity {:.2f} < uniform {:.0f}; 200 generations: {} EOM, {} "
                      "cap, {} other",
                      ppl, uniform, by_eom, by_cap, other),
          s};
}

}  // namespace
}  // namespace ua

int main() {
  using namespace ua;
  init_logging();
  Shared shared;
  criterion("fsq_bijection", [] { return from_check(check_fsq_bijection(), kFsqBudgetS); });
  criterion("gradient_check", [] {
    const CheckResult r = check_codec_gradients();
    return from_check(r, kGradBudgetS);
  });
  criterion("codec_training", [&] { return codec_training(shared); });
  criterion("causality",
            [] { return from_check(check_causality(kCausalSequences), kCausalBudgetS); });
  criterion("denoising", [&] { return denoising(shared); });
  criterion("streaming", [&] { return streaming(shared); });
  criterion("motion_matching", [] { return motion_matching(); });
  criterion("metrics_oracle", [] { return metrics_oracle(); });
  criterion("vocabulary_layout", [] { return vocabulary(); });
  criterion("generator", [] { return generator(); });

  const auto failed = std::count_if(g_lines.begin(), g_lines.end(),
                                    [](const Line& l) { return !l.passed; });
  std::printf("%zu/%zu criteria passed\n", g_lines.size() - static_cast<std::size_t>(failed),
              g_lines.size());
  return failed == 0 ? 0 : 1;
}
