#include "ua/eval/features.hpp"

#include <algorithm>
#include <cmath>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
};

// Mean and population std over values sorted in place, so the result does
// not depend on sample order.
Stats sorted_stats(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) return {values.front(), 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace

FeatureVector motion_features(const MotionSequence& seq) {
  const std::size_t n = seq.size();
  if (n < 2) throw LengthError("features need at least two frames");
  constexpr Eigen::Index d = static_cast<Eigen::Index>(kNumDofs);
  FeatureVector f(kFeatureWidth);
  std::vector<double> values(n);
  std::vector<double> speeds(n - 1);
  for (std::size_t j = 0; j < kNumDofs; ++j) {
    for (std::size_t t = 0; t < n; ++t) values[t] = seq[t].dofs[j];
    const Stats s = sorted_stats(values);
    for (std::size_t t = 0; t + 1 < n; ++t) {
      speeds[t] = std::abs(seq[t + 1].dofs[j] - seq[t].dofs[j]) * seq.fps();
    }
    const Stats v = sorted_stats(speeds);
    const auto row = static_cast<Eigen::Index>(j);
    f(row) = s.mean;
    f(d + row) = s.stddev;
    f(2 * d + row) = v.mean;
  }
  for (std::size_t t = 0; t + 1 < n; ++t) {
    speeds[t] = (seq[t + 1].root.position - seq[t].root.position).norm() * seq.fps();
  }
  const Stats r = sorted_stats(speeds);
  f(3 * d) = r.mean;
  f(3 * d + 1) = r.stddev;
  return f;
}

std::vector<FeatureVector> motion_features(std::span<const MotionSequence> seqs) {
  std::vector<FeatureVector> out;
  out.reserve(seqs.size());
  for (const MotionSequence& s : seqs) out.push_back(motion_features(s));
  return out;
}

}  // namespace ua
