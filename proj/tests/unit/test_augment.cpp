#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "ua/augment/gait.hpp"
#include "ua/augment/synthesize.hpp"
#include "ua/common/errors.hpp"

namespace ua {
namespace {

MotionSequence straight_walk(double speed, std::size_t frames) {
  std::vector<MotionFrame> f(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    f[i].root.position = Vec3(speed * static_cast<double>(i) / kCanonicalFps, 0.0, 0.6);
    f[i].root.orientation = yaw_quat(0.7);
    f[i].root.position.head<2>() = Eigen::Rotation2Dd(0.7) * f[i].root.position.head<2>();
  }
  return MotionSequence(kCanonicalFps, std::move(f));
}

GaitOptions straight_gait(double seconds) {
  GaitOptions o;
  o.duration_s = seconds;
  o.min_speed = 1.0;
  o.max_speed = 1.0;
  o.max_turn_rate_deg = 0.0;
  return o;
}

TEST(Gait, StanceFeetArePlanted) {
  const MotionSequence g = synthetic_gait({.duration_s = 8.0});
  const SequenceFeatures f(g);
  std::size_t grounded = 0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    for (int foot = 0; foot < 2; ++foot) {
      if (f.contact(i, foot) && f.contact(i - 1, foot)) {
        ++grounded;
        EXPECT_LT((f.foot_position(i, foot) - f.foot_position(i - 1, foot)).head<2>().norm(), 0.002);
      }
    }
  }
  EXPECT_GT(grounded, g.size() / 2);
}

TEST(Gait, RejectsUnreachableSpeed) {
  GaitOptions o;
  o.max_speed = 3.0;
  EXPECT_THROW(synthetic_gait(o), ConfigError);
}

TEST(Features, StationaryPose) {
  const MotionSequence still(kCanonicalFps, std::vector<MotionFrame>(80));
  const MatchFeature m = extract_features(still, 5);
  EXPECT_TRUE(m.velocity.isZero(0.0));
  EXPECT_TRUE(m.trajectory.isZero(0.0));
}

TEST(Features, StraightWalkFuturePoints) {
  const double v = 1.3;
  const MatchFeature m = extract_features(straight_walk(v, 100), 10);
  const Eigen::Matrix<double, 6, 1> expected =
      (Eigen::Matrix<double, 6, 1>() << 0.4 * v, 0, 0.8 * v, 0, 1.2 * v, 0).finished();
  EXPECT_TRUE((m.trajectory - expected).isZero(1e-12));
  EXPECT_NEAR(m.velocity(0), v, 1e-12);
  EXPECT_NEAR(m.velocity(1), 0.0, 1e-12);
}

TEST(Features, InsufficientFutureIsRangeError) {
  const MotionSequence s = straight_walk(1.0, 61);
  EXPECT_NO_THROW(extract_features(s, 0));
  EXPECT_THROW(extract_features(s, 1), RangeError);
}

TEST(Features, PhaseRisesBetweenStrikes) {
  const SequenceFeatures f(synthetic_gait(straight_gait(6.0)));
  const auto& strikes = f.left_strikes();
  ASSERT_GE(strikes.size(), 4u);
  for (std::size_t k = 0; k + 1 < strikes.size(); ++k) {
    EXPECT_EQ(f.phase(strikes[k]), 0.0);
    for (std::size_t i = strikes[k] + 1; i < strikes[k + 1]; ++i) {
      EXPECT_GT(f.phase(i), f.phase(i - 1));
      EXPECT_LT(f.phase(i), 1.0);
    }
  }
}

TEST(Features, TranslationAndHeadingInvariance) {
  const MotionSequence g = synthetic_gait({.duration_s = 5.0});
  RootState to;
  to.position = Vec3(4.0, -3.0, g[0].root.position.z());
  to.orientation = yaw_quat(1.1);
  const auto moved = reanchor(g.frames(), g[0].root, to);
  const MatchFeature a = extract_features(g, 40);
  const MatchFeature b = extract_features(MotionSequence(g.fps(), moved), 40);
  EXPECT_NEAR(match_cost(a, b), 0.0, 1e-9);
}

TEST(Segment, ClipsStartAtStrikes) {
  const MotionSequence g = synthetic_gait(straight_gait(10.0));
  const auto clips = segment(g);
  ASSERT_GE(clips.size(), 4u);
  for (std::size_t k = 0; k < clips.size(); ++k) {
    const double nearest = std::round(static_cast<double>(clips[k].source_start) / 50.0) * 50.0;
    EXPECT_LE(std::abs(static_cast<double>(clips[k].source_start) - nearest), 1.0);
    const double duration = clips[k].frames.duration();
    EXPECT_GE(duration, 2.0);
    EXPECT_LE(duration, 4.0);
    EXPECT_EQ(clips[k].features.size(), clips[k].frames.size());
    EXPECT_NEAR(clips[k].mean_speed, 1.0, 0.02);
    EXPECT_NEAR(clips[k].total_turn_deg, 0.0, 1e-9);
    if (k > 0) {
      EXPECT_LT(clips[k].source_start - clips[k - 1].source_start, clips[k - 1].frames.size());
    }
  }
}

TEST(Segment, ClipEntriesAndHandoffsAreStrikes) {
  const auto clips = segment(synthetic_gait(straight_gait(10.0)));
  for (const MotionClip& c : clips) {
    EXPECT_TRUE(c.features.front().contact[0]);
    EXPECT_EQ(c.features.front().phase, 0.0);
    EXPECT_EQ(c.features[c.frames.size() - 10].phase, 0.0);
  }
}

TEST(Segment, ShortOrStillSequences) {
  EXPECT_THROW(segment(synthetic_gait(straight_gait(3.0))), LengthError);
  // A pose floating above the ground has no contacts.
  std::vector<MotionFrame> f(300);
  for (auto& x : f) x.root.position.z() = 2.0;
  EXPECT_TRUE(segment(MotionSequence(kCanonicalFps, f)).empty());
}

TEST(MatchCost, Examples) {
  const MatchFeature a = extract_features(synthetic_gait({.duration_s = 5.0}), 30);
  EXPECT_EQ(match_cost(a, a), 0.0);
  MatchFeature b = a;
  b.contact[0] = !b.contact[0];
  b.contact[1] = !b.contact[1];
  MatchWeights w;
  EXPECT_DOUBLE_EQ(match_cost(a, b, w), 2.0 * w.contact);
  MatchFeature c = extract_features(synthetic_gait({.duration_s = 5.0}), 55);
  const MatchWeights doubled{2 * w.pose, 2 * w.velocity, 2 * w.trajectory, 2 * w.contact};
  EXPECT_NEAR(match_cost(a, c, doubled), 2.0 * match_cost(a, c, w), 1e-12);
  EXPECT_GT(match_cost(a, c, w), 0.0);
  EXPECT_THROW(match_cost(a, c, {-1.0, 1.0, 1.0, 1.0}), PreconditionError);
}

TEST(History, AgesAndEviction) {
  HistoryBuffer h(3, 1.0);
  for (int id : {1, 2, 3}) h.push(id);
  EXPECT_EQ(h.age(3), 0u);
  EXPECT_EQ(h.age(1), 2u);
  EXPECT_DOUBLE_EQ(h.penalty(3), 1.0);
  EXPECT_DOUBLE_EQ(h.penalty(1), 1.0 / 3.0);
  h.push(4);
  EXPECT_FALSE(h.age(1).has_value());
  EXPECT_EQ(h.penalty(1), 0.0);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_THROW(HistoryBuffer(0), ConfigError);
}

TEST(SelectNext, SingleCandidate) {
  HistoryBuffer h;
  Rng rng = make_rng(1);
  const std::vector<Candidate> c{{7, 3.0}};
  EXPECT_EQ(select_next(c, h, rng), 7);
  EXPECT_EQ(h.age(7), 0u);
  EXPECT_THROW(select_next({}, h, rng), PreconditionError);
}

TEST(SelectNext, FreshClipPreferred) {
  int fresh = 0;
  const int trials = 2000;
  for (int s = 0; s < trials; ++s) {
    HistoryBuffer h(16, 1.0);
    h.push(1);
    Rng rng = make_rng(static_cast<std::uint64_t>(s));
    const std::vector<Candidate> c{{1, 0.5}, {2, 0.5}};
    if (select_next(c, h, rng) == 2) ++fresh;
  }
  // Softmin of a unit penalty: 1 / (1 + e^-1) = 0.731.
  EXPECT_NEAR(fresh / static_cast<double>(trials), 1.0 / (1.0 + std::exp(-1.0)), 0.03);
}

TEST(SelectNext, OnlyTopFiveAreChosen) {
  const std::vector<Candidate> c{{10, 0.1}, {11, 0.2}, {12, 0.3}, {13, 0.4}, {14, 0.5}, {15, 0.6}};
  std::set<int> seen;
  for (int s = 0; s < 3000; ++s) {
    HistoryBuffer h;
    Rng rng = make_rng(static_cast<std::uint64_t>(s));
    seen.insert(select_next(c, h, rng));
  }
  EXPECT_EQ(seen, (std::set<int>{10, 11, 12, 13, 14}));
}

std::vector<MotionFrame> yaw_frames(double yaw, std::size_t n) {
  std::vector<MotionFrame> f(n);
  for (auto& x : f) x.root.orientation = yaw_quat(yaw);
  return f;
}

TEST(Blend, EndpointsAreExact) {
  const MotionSequence g = synthetic_gait({.duration_s = 4.0});
  const auto tail = g.frames().subspan(13, 10);
  const auto head = g.frames().subspan(71, 10);
  const auto out = blend(tail, head, 10);
  ASSERT_EQ(out.size(), 10u);
  EXPECT_EQ(out.front(), tail[0]);
  EXPECT_EQ(out.back(), head[9]);
}

TEST(Blend, IdenticalSourcesAreUnchanged) {
  const MotionSequence g = synthetic_gait({.duration_s = 4.0});
  const auto w = g.frames().subspan(20, 10);
  const auto out = blend(w, w, 10);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(out[i].dofs, w[i].dofs);
    EXPECT_EQ(out[i].root.position, w[i].root.position);
    EXPECT_NEAR(out[i].root.orientation.angularDistance(w[i].root.orientation), 0.0, 1e-12);
  }
}

TEST(Blend, YawMidpointIsHalfway) {
  const auto a = yaw_frames(0.0, 3);
  const auto b = yaw_frames(std::numbers::pi / 2, 3);
  const auto out = blend(a, b, 3);
  EXPECT_NEAR(heading_of(out[1].root.orientation), std::numbers::pi / 4, 1e-12);
}

TEST(Blend, ShortSidesAreRejected) {
  const auto a = yaw_frames(0.0, 9);
  const auto b = yaw_frames(0.0, 10);
  EXPECT_THROW(blend(a, b, 10), PreconditionError);
}

TEST(Reanchor, KeepsDofsAndRelativeMotion) {
  const MotionSequence g = synthetic_gait({.duration_s = 4.0});
  RootState to;
  to.position = Vec3(2.0, 1.0, 5.0);
  to.orientation = yaw_quat(-2.0);
  const auto moved = reanchor(g.frames(), g[0].root, to);
  EXPECT_NEAR(moved[0].root.position.x(), 2.0, 1e-12);
  EXPECT_NEAR(moved[0].root.position.y(), 1.0, 1e-12);
  EXPECT_EQ(moved[0].root.position.z(), g[0].root.position.z());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(moved[i].dofs, g[i].dofs);
    if (i > 0) {
      EXPECT_NEAR((moved[i].root.position - moved[i - 1].root.position).norm(),
                  (g[i].root.position - g[i - 1].root.position).norm(), 1e-12);
    }
  }
}

class Library : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const std::vector<MotionSequence> src{synthetic_gait({})};
    lib_ = new std::vector<MotionClip>(build_library(src));
  }
  static void TearDownTestSuite() { delete lib_; }
  static std::vector<MotionClip>* lib_;
};

std::vector<MotionClip>* Library::lib_ = nullptr;

TEST_F(Library, BuildsFromOneMinute) {
  EXPECT_GE(lib_->size(), 40u);
  for (std::size_t i = 0; i < lib_->size(); ++i) EXPECT_EQ((*lib_)[i].id, static_cast<int>(i));
}

TEST_F(Library, SynthesizesWithoutViolations) {
  SynthesisOptions o;
  o.duration_s = 300.0;
  o.seed = 5;
  const SynthesisResult r = synthesize(*lib_, o);
  EXPECT_GE(r.motion.duration(), 300.0);
  EXPECT_EQ(r.qc.violations(), 0u);
  EXPECT_LE(r.qc.max_root_jump, 0.05);
  EXPECT_LE(r.qc.max_dof_delta, 0.3);
  EXPECT_EQ(r.clips.size(), r.qc.transitions.size() + 1);
  for (std::size_t i = 1; i < r.clips.size(); ++i) {
    for (std::size_t k = i >= o.reuse_window ? i - o.reuse_window : 0; k < i; ++k) {
      EXPECT_NE(r.clips[k], r.clips[i]);
    }
  }
  std::ostringstream report;
  write_qc_report(report, r.qc);
  EXPECT_NE(report.str().find("reuse_violations 0"), std::string::npos);
}

TEST_F(Library, ReproducibleUnderSeed) {
  SynthesisOptions o;
  o.duration_s = 60.0;
  EXPECT_EQ(synthesize(*lib_, o).motion, synthesize(*lib_, o).motion);
}

TEST_F(Library, TargetPathSteersTurning) {
  // A path curving left at 20 deg/s should yield more left turn than a
  // path curving right.
  auto heading_change = [&](double rate_deg) {
    SynthesisOptions o;
    o.duration_s = 60.0;
    o.seed = 2;
    double yaw = 0.0;
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < 4000; ++i) {
      o.target_path.push_back(p);
      yaw += rate_deg * std::numbers::pi / 180.0 / kCanonicalFps;
      p += Vec3(std::cos(yaw), std::sin(yaw), 0.0) / kCanonicalFps;
    }
    const SynthesisResult r = synthesize(*lib_, o);
    double turn = 0.0;
    for (std::size_t i = 1; i < r.motion.size(); ++i) {
      turn += wrap_angle(heading_of(r.motion[i].root.orientation) -
                         heading_of(r.motion[i - 1].root.orientation));
    }
    return turn;
  };
  EXPECT_GT(heading_change(20.0), heading_change(-20.0));
}

TEST_F(Library, ExhaustedCandidatesReportPartialOutput) {
  SynthesisOptions o;
  o.duration_s = 60.0;
  o.max_root_jump = 1e-6;
  try {
    synthesize(*lib_, o);
    FAIL() << "expected SynthesisError";
  } catch (const SynthesisError& e) {
    EXPECT_GT(e.partial().size(), 0u);
  }
}

TEST_F(Library, InvalidOptions) {
  SynthesisOptions o;
  o.reuse_window = 40;
  EXPECT_THROW(synthesize(*lib_, o), ConfigError);
  EXPECT_THROW(synthesize({}, SynthesisOptions{}), PreconditionError);
}

}  // namespace
}  // namespace ua
