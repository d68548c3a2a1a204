#pragma once

#include <span>
#include <vector>

#include "ua/common/rng.hpp"
#include "ua/eval/features.hpp"

namespace ua {

// Frechet distance between Gaussian fits of two feature sets (sample
// covariance). Sets smaller than dim + 1 get a 1e-6 ridge on the diagonal.
// Throws InputError on an empty set, DimensionError on mismatched widths.
double fid(std::span<const FeatureVector> a, std::span<const FeatureVector> b);

// Mean Euclidean distance over `num_pairs` random pairs of distinct items.
// Throws InputError with fewer than two items.
double diversity(std::span<const FeatureVector> set, std::size_t num_pairs, Rng& rng);

// Mean distance between a[i] and b[i]. Throws DimensionError on size mismatch,
// InputError when empty.
double mm_dist(std::span<const FeatureVector> a, std::span<const FeatureVector> b);

inline constexpr std::size_t kRetrievalBatch = 32;

// Percentage of queries whose paired candidate ranks within the top k among
// the candidates of its batch of `batch` consecutive pairs (the final batch
// may be shorter). Equal distances rank by candidate index.
// Throws PreconditionError if k == 0 or k > batch.
double r_precision(std::span<const FeatureVector> queries,
                   std::span<const FeatureVector> candidates, std::size_t k,
                   std::size_t batch = kRetrievalBatch);

// Horizontal (x, y) RMSE in meters between root paths of equal length.
// Throws DimensionError on a length mismatch, InputError when empty.
double root_rmse(std::span<const Vec3> path, std::span<const Vec3> target);
// Resamples `target` to the fps of `seq` and compares the overlapping frames.
double root_rmse(const MotionSequence& seq, const MotionSequence& target);

std::vector<Vec3> root_positions(const MotionSequence& seq);

// 1 - within-genre / cross-genre mean distance, clamped to [0, 1]; 0 when
// the cross-genre distance is 0. Throws InputError unless there are at least
// two genres with at least two samples each.
double genre_score(std::span<const std::vector<FeatureVector>> genres);

enum class TaskKind { kText, kTrajectory, kMusic };

struct TrialOutcome {
  TaskKind task = TaskKind::kText;
  bool fell = false;
  double mpjpe_cm = 0.0;
  double root_rmse_m = 0.0;
};

struct SuccessThresholds {
  double mpjpe_m = 0.8;      // text tasks
  double root_rmse_m = 1.0;  // trajectory tasks
};

// Percentage of trials that did not fall and met their task threshold.
// Throws InputError on an empty list.
double success_rate(std::span<const TrialOutcome> trials, const SuccessThresholds& thresholds = {});

}  // namespace ua
