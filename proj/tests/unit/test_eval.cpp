#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"
#include "ua/eval/features.hpp"
#include "ua/eval/metrics.hpp"
#include "ua/eval/pd.hpp"
#include "ua/eval/reward.hpp"
#include "ua/motion/synthetic.hpp"

namespace ua {
namespace {

FeatureVector vec(std::initializer_list<double> v) {
  FeatureVector f(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) f(i++) = x;
  return f;
}

MotionSequence reversed(const MotionSequence& s) {
  std::vector<MotionFrame> frames(s.frames().rbegin(), s.frames().rend());
  return MotionSequence(s.fps(), std::move(frames));
}


PdConfig unit_inertia() {
  PdConfig c;
  c.inertia.assign(kNumDofs, 1.0);
  return c;
}

TEST(Features, ConstantSequenceHasZeroSpreadAndVelocity) {
  const auto seqs = constant_corpus(1, 20, 3);
  const FeatureVector f = motion_features(seqs[0]);
  ASSERT_EQ(f.size(), kFeatureWidth);
  EXPECT_TRUE(f.segment(kNumDofs, 2 * kNumDofs + 2).isZero(0.0));
}

TEST(Features, TimeReversalIsIdentical) {
  const auto seqs = sinusoid_corpus({.num_sequences = 4, .frames = 64});
  for (const auto& s : seqs) EXPECT_EQ(motion_features(s), motion_features(reversed(s)));
}

TEST(Features, ScalingAnglesDoublesMeanAndStd) {
  const auto seqs = sinusoid_corpus({.num_sequences = 1, .frames = 64});
  const Eigen::MatrixXd m = dof_matrix(seqs[0]);
  const FeatureVector a = motion_features(from_dof_matrix(m, kCanonicalFps));
  const FeatureVector b = motion_features(from_dof_matrix(2.0 * m, kCanonicalFps));
  const Eigen::Index d = kNumDofs;
  EXPECT_TRUE((b.head(2 * d) - 2.0 * a.head(2 * d)).isZero(1e-12));
  EXPECT_TRUE((b.segment(2 * d, d) - 2.0 * a.segment(2 * d, d)).isZero(1e-9));
}

TEST(Features, TranslationInvariant) {
  const auto seqs = sinusoid_corpus({.num_sequences = 1, .frames = 32});
  std::vector<MotionFrame> frames(seqs[0].frames().begin(), seqs[0].frames().end());
  for (auto& f : frames) f.root.position += Vec3(3.0, -2.0, 0.5);
  EXPECT_TRUE((motion_features(MotionSequence(kCanonicalFps, frames)) - motion_features(seqs[0]))
                  .isZero(1e-9));
}

TEST(Features, SingleFrameIsLengthError) {
  const auto seqs = constant_corpus(1, 1, 3);
  EXPECT_THROW(motion_features(seqs[0]), LengthError);
}

TEST(Fid, IdenticalSetsGiveZero) {
  const auto seqs = sinusoid_corpus({.num_sequences = 40, .frames = 32});
  const auto f = motion_features(seqs);
  EXPECT_NEAR(fid(f, f), 0.0, 1e-6);
}

TEST(Fid, MeanShiftOfOne) {
  const double c = std::sqrt(0.5);
  const std::vector<FeatureVector> a{vec({-c}), vec({c})};
  const std::vector<FeatureVector> b{vec({1 - c}), vec({1 + c})};
  EXPECT_NEAR(fid(a, b), 1.0, 1e-12);
}

TEST(Fid, StdOneVersusThree) {
  const double c = std::sqrt(0.5);
  const std::vector<FeatureVector> a{vec({-c}), vec({c})};
  const std::vector<FeatureVector> b{vec({-3 * c}), vec({3 * c})};
  EXPECT_NEAR(fid(a, b), 4.0, 1e-12);
}

TEST(Fid, DiagonalCovarianceOracle) {
  // Points (+-s1, 0), (0, +-s2) have zero mean and covariance diag(2 s^2 / 3).
  auto cross = [](double s1, double s2, double m) {
    return std::vector<FeatureVector>{vec({m + s1, m}), vec({m - s1, m}), vec({m, m + s2}),
                                      vec({m, m - s2})};
  };
  const auto a = cross(1.0, 2.0, 0.0);
  const auto b = cross(3.0, 0.5, 1.0);
  double expected = 2.0;  // |(1, 1)|^2
  for (auto [x, y] : {std::pair{1.0, 3.0}, std::pair{2.0, 0.5}}) {
    const double sa = std::sqrt(2.0 * x * x / 3.0);
    const double sb = std::sqrt(2.0 * y * y / 3.0);
    expected += (sa - sb) * (sa - sb);
  }
  EXPECT_NEAR(fid(a, b), expected, 1e-10);
}

TEST(Fid, SymmetricAndNonNegative) {
  const auto fa = motion_features(sinusoid_corpus({.num_sequences = 30, .frames = 32, .seed = 1}));
  const auto fb = motion_features(sinusoid_corpus({.num_sequences = 30, .frames = 32, .seed = 2}));
  const double ab = fid(fa, fb);
  EXPECT_GE(ab, 0.0);
  EXPECT_NEAR(ab, fid(fb, fa), 1e-6 * std::max(1.0, ab));
}

TEST(Fid, EmptySetIsInputError) {
  const std::vector<FeatureVector> a{vec({1.0})};
  EXPECT_THROW(fid(a, {}), InputError);
  EXPECT_THROW(fid({}, a), InputError);
}

TEST(Retrieval, IdenticalFeatures) {
  const std::vector<FeatureVector> f(64, vec({1.0, 2.0}));
  Rng rng = make_rng(1);
  EXPECT_EQ(diversity(f, 100, rng), 0.0);
  EXPECT_EQ(mm_dist(f, f), 0.0);
  // Ties rank by index, so only the first query of each batch ranks first.
  EXPECT_DOUBLE_EQ(r_precision(f, f, 1), 100.0 * 2.0 / 64.0);
}

TEST(Retrieval, SeparablePairsScorePerfectly) {
  std::vector<FeatureVector> q;
  std::vector<FeatureVector> c;
  for (int i = 0; i < 70; ++i) {
    q.push_back(vec({10.0 * i, 0.0}));
    c.push_back(vec({10.0 * i + 0.5, 0.1}));
  }
  for (std::size_t k : {1u, 2u, 3u}) EXPECT_DOUBLE_EQ(r_precision(q, c, k), 100.0);
}

TEST(Retrieval, TopKIsMonotone) {
  Rng rng = make_rng(5);
  std::vector<FeatureVector> q;
  std::vector<FeatureVector> c;
  for (int i = 0; i < 96; ++i) {
    q.push_back(vec({uniform01(rng), uniform01(rng)}));
    c.push_back(vec({uniform01(rng), uniform01(rng)}));
  }
  const double r1 = r_precision(q, c, 1);
  const double r2 = r_precision(q, c, 2);
  const double r3 = r_precision(q, c, 3);
  EXPECT_LE(r1, r2);
  EXPECT_LE(r2, r3);
}

TEST(Retrieval, KLargerThanBatchIsRejected) {
  const std::vector<FeatureVector> f(4, vec({0.0}));
  EXPECT_THROW(r_precision(f, f, 33), PreconditionError);
  EXPECT_THROW(r_precision(f, f, 0), PreconditionError);
}

TEST(Retrieval, DiversityMatchesPairDistance) {
  const std::vector<FeatureVector> f{vec({0.0, 0.0}), vec({3.0, 4.0})};
  Rng rng = make_rng(2);
  EXPECT_DOUBLE_EQ(diversity(f, 10, rng), 5.0);
  EXPECT_THROW(diversity(std::span(f).first(1), 10, rng), InputError);
}

TEST(RootRmse, IdenticalAndOffsetPaths) {
  const auto seqs = sinusoid_corpus({.num_sequences = 1, .frames = 32});
  EXPECT_EQ(root_rmse(seqs[0], seqs[0]), 0.0);
  std::vector<MotionFrame> frames(seqs[0].frames().begin(), seqs[0].frames().end());
  for (auto& f : frames) f.root.position += Vec3(0.0, 1.0, 0.7);
  EXPECT_NEAR(root_rmse(MotionSequence(kCanonicalFps, frames), seqs[0]), 1.0, 1e-12);
}

TEST(RootRmse, TargetIsResampled) {
  std::vector<MotionFrame> a(51);
  std::vector<MotionFrame> b(11);
  for (std::size_t i = 0; i < a.size(); ++i) a[i].root.position = Vec3(0.02 * i, 0, 0);
  for (std::size_t i = 0; i < b.size(); ++i) b[i].root.position = Vec3(0.1 * i, 0, 0);
  EXPECT_NEAR(root_rmse(MotionSequence(50.0, a), MotionSequence(10.0, b)), 0.0, 1e-12);
}

TEST(Success, Thresholds) {
  const std::vector<TrialOutcome> trials{
      {TaskKind::kText, false, 79.9, 5.0},       // ok
      {TaskKind::kText, false, 80.0, 0.0},       // MPJPE not below 0.8 m
      {TaskKind::kTrajectory, false, 500.0, 0.99},  // ok
      {TaskKind::kTrajectory, false, 0.0, 1.0},  // RMSE not below 1 m
      {TaskKind::kMusic, true, 0.0, 0.0},        // fell
      {TaskKind::kMusic, false, 0.0, 0.0}};      // ok
  EXPECT_DOUBLE_EQ(success_rate(trials), 50.0);
  EXPECT_THROW(success_rate({}), InputError);
}

TEST(Genre, SeparatedIdenticalGenresScoreOne) {
  const std::vector<std::vector<FeatureVector>> g{{vec({0.0}), vec({0.0})}, {vec({5.0}), vec({5.0})}};
  EXPECT_DOUBLE_EQ(genre_score(g), 1.0);
}

TEST(Genre, AllIdenticalScoresZero) {
  const std::vector<std::vector<FeatureVector>> g{{vec({1.0}), vec({1.0})}, {vec({1.0}), vec({1.0})}};
  EXPECT_DOUBLE_EQ(genre_score(g), 0.0);
}

TEST(Genre, ShuffledLabelsScoreNearZero) {
  Rng rng = make_rng(9);
  std::vector<FeatureVector> all;
  for (int g = 0; g < 4; ++g) {
    for (int i = 0; i < 50; ++i) all.push_back(vec({20.0 * g + uniform01(rng), uniform01(rng)}));
  }
  std::vector<std::vector<FeatureVector>> clustered(4);
  for (std::size_t i = 0; i < all.size(); ++i) clustered[i / 50].push_back(all[i]);
  EXPECT_GT(genre_score(clustered), 0.9);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<std::vector<FeatureVector>> shuffled(4);
  for (std::size_t i = 0; i < all.size(); ++i) shuffled[i / 50].push_back(all[i]);
  EXPECT_LT(genre_score(shuffled), 0.1);
}

TEST(Genre, DegenerateInputIsRejected) {
  const std::vector<std::vector<FeatureVector>> one{{vec({0.0}), vec({1.0})}};
  EXPECT_THROW(genre_score(one), InputError);
  const std::vector<std::vector<FeatureVector>> thin{{vec({0.0})}, {vec({1.0}), vec({2.0})}};
  EXPECT_THROW(genre_score(thin), InputError);
}

TEST(Pd, GainsFromLiteralValues) {
  const PdGains g = pd_gains(unit_inertia());
  EXPECT_DOUBLE_EQ(g.kp[0], 100.0);
  EXPECT_DOUBLE_EQ(g.kd[0], 40.0);
  PdConfig hz = unit_inertia();
  hz.omega_in_hz = true;
  const double w = 2.0 * std::numbers::pi * 10.0;
  EXPECT_DOUBLE_EQ(pd_gains(hz).kp[0], w * w);
}

TEST(Pd, GainsIncreaseWithOmegaAndInertia) {
  PdConfig c = unit_inertia();
  const double base = pd_gains(c).kp[3];
  c.omega_n = 11.0;
  EXPECT_GT(pd_gains(c).kp[3], base);
  c = unit_inertia();
  c.inertia[3] = 1.5;
  EXPECT_GT(pd_gains(c).kp[3], base);
}

TEST(Pd, TorqueExamples) {
  const PdGains g = pd_gains(unit_inertia());
  DofVector q;
  DofVector v;
  EXPECT_EQ(pd_torque(q, q, v, g), DofVector{});
  v[2] = 0.5;
  EXPECT_DOUBLE_EQ(pd_torque(q, q, v, g)[2], -20.0);
}

TEST(Pd, InvalidConfigIsRejected) {
  PdConfig c;
  c.zeta = 0.0;
  EXPECT_THROW(pd_gains(c), ConfigError);
  c = PdConfig{};
  c.inertia.assign(3, 1.0);
  EXPECT_THROW(pd_gains(c), ConfigError);
}

TEST(Track, ConstantReferenceIsExact) {
  const auto seqs = constant_corpus(1, 40, 4);
  const TrackResult r = simulate_track(seqs[0]);
  EXPECT_EQ(r.tracked, seqs[0]);
  EXPECT_FALSE(r.trial.fell);
  EXPECT_EQ(r.trial.mpjpe_cm, 0.0);
  for (const auto& rw : r.trial.rewards) {
    EXPECT_DOUBLE_EQ(rw.root_orientation + rw.body_position + rw.body_orientation +
                         rw.body_linear_velocity + rw.body_angular_velocity,
                     5.0);
  }
}

TEST(Track, OverdampedStepDoesNotOvershoot) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kNumDofs, 250);
  m.rightCols(249).setConstant(1.0);
  const TrackResult r = simulate_track(from_dof_matrix(m, kCanonicalFps));
  for (std::size_t j = 0; j < kNumDofs; ++j) {
    int sign_changes = 0;
    double prev_err = 1.0;
    double peak = 0.0;
    for (const auto& f : r.tracked.frames()) {
      peak = std::max(peak, f.dofs[j]);
      const double err = 1.0 - f.dofs[j];
      if (err * prev_err < 0.0) ++sign_changes;
      if (err != 0.0) prev_err = err;
    }
    EXPECT_LE(peak, 1.01) << "dof " << j;
    EXPECT_LE(sign_changes, 1) << "dof " << j;
    EXPECT_NEAR(r.tracked.frames().back().dofs[j], 1.0, 1e-3);
  }
}

TEST(Track, RampLagMatchesLinearAnalysis) {
  const double rate = 0.5;
  Eigen::MatrixXd m(kNumDofs, 400);
  for (Eigen::Index t = 0; t < m.cols(); ++t) m.col(t).setConstant(rate * t / kCanonicalFps);
  const PdConfig cfg = unit_inertia();
  const TrackResult r = simulate_track(from_dof_matrix(m, kCanonicalFps), cfg);
  const PdGains g = pd_gains(cfg);
  const double expected = g.kd[0] * rate / g.kp[0];
  const auto& last = r.tracked.frames().back();
  for (std::size_t j = 0; j < kNumDofs; ++j) {
    EXPECT_NEAR(m(static_cast<Eigen::Index>(j), m.cols() - 1) - last.dofs[j], expected, 1e-6);
  }
}

TEST(Track, LargeSustainedErrorIsAFall) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kNumDofs, 100);
  for (Eigen::Index t = 1; t < m.cols(); ++t) m(5, t) = 40.0 * t / kCanonicalFps;
  PdConfig cfg;
  EXPECT_TRUE(simulate_track(from_dof_matrix(m, kCanonicalFps), cfg).trial.fell);
  m.row(5) *= 0.01;
  EXPECT_FALSE(simulate_track(from_dof_matrix(m, kCanonicalFps), cfg).trial.fell);
}

RewardInput still(const MotionFrame& tracked, const MotionFrame& reference) {
  return {tracked, tracked, reference, reference, reference.dofs, reference.dofs, 0.02};
}

TEST(Reward, ZeroErrorTotal) {
  MotionFrame f;
  f.root.position = Vec3(0, 0, 1.0);
  const RewardBreakdown r = reward_terms(still(f, f), KinematicModel::g1());
  EXPECT_DOUBLE_EQ(r.root_orientation, 1.0);
  EXPECT_DOUBLE_EQ(r.body_position, 1.0);
  EXPECT_DOUBLE_EQ(r.total, 4.5);
}

TEST(Reward, RootOrientationAtSigma) {
  MotionFrame ref;
  ref.root.position = Vec3(0, 0, 1.0);
  MotionFrame tr = ref;
  tr.root.orientation = yaw_quat(0.4);
  const RewardBreakdown r = reward_terms(still(tr, ref), KinematicModel::g1());
  EXPECT_NEAR(r.root_orientation, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(r.total, 0.5 * std::exp(-1.0) + 4.0, 1e-9);
}

TEST(Reward, JointLimitPenalty) {
  MotionFrame ref;
  ref.root.position = Vec3(0, 0, 1.0);
  MotionFrame tr = ref;
  tr.dofs[5] = 0.3;  // left ankle roll limit is 0.26
  const RewardBreakdown r = reward_terms(still(tr, tr), KinematicModel::g1());
  EXPECT_EQ(r.joint_limit, 1.0);
  EXPECT_DOUBLE_EQ(r.total, 4.5 - 10.0);
}

TEST(Reward, UndesiredContactsAndActionRate) {
  MotionFrame f;
  f.root.position = Vec3(0, 0, 0.05);  // pelvis above ground, knees and hips below
  RewardInput in = still(f, f);
  in.action[0] = 1.0;
  const RewardBreakdown r = reward_terms(in, KinematicModel::g1());
  EXPECT_GT(r.undesired_contacts, 0.0);
  EXPECT_DOUBLE_EQ(r.action_rate, 1.0);
  EXPECT_NEAR(r.total, 4.5 - 0.1 - 0.1 * r.undesired_contacts, 1e-12);
}

TEST(Reward, TermsShrinkAsErrorGrows) {
  MotionFrame ref;
  ref.root.position = Vec3(0, 0, 1.0);
  double prev_total = 5.0;
  for (double e : {0.0, 0.1, 0.2, 0.4, 0.8}) {
    MotionFrame tr = ref;
    tr.dofs[3] = e;
    const RewardBreakdown r = reward_terms(still(tr, ref), KinematicModel::g1());
    for (double term : {r.root_orientation, r.body_position, r.body_orientation,
                        r.body_linear_velocity, r.body_angular_velocity}) {
      EXPECT_GT(term, 0.0);
      EXPECT_LE(term, 1.0);
    }
    EXPECT_LT(r.total, prev_total);
    prev_total = r.total;
  }
}

}  // namespace
}  // namespace ua
