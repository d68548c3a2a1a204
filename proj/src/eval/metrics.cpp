#include "ua/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

constexpr double kRidge = 1e-6;

void check_widths(std::span<const FeatureVector> set, Eigen::Index width) {
  for (const FeatureVector& f : set) {
    if (f.size() != width) {
      throw DimensionError(fmt::format("feature width {} differs from {}", f.size(), width));
    }
  }
}

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Gaussian fit(std::span<const FeatureVector> set) {
  const Eigen::Index dim = set.front().size();
  const auto n = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd x(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) x.col(i) = set[static_cast<std::size_t>(i)];
  Gaussian g;
  g.mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - g.mean;
  g.cov = n > 1 ? Eigen::MatrixXd(centered * centered.transpose() / static_cast<double>(n - 1))
                : Eigen::MatrixXd::Zero(dim, dim);
  if (n < dim + 1) g.cov.diagonal().array() += kRidge;
  return g;
}

// Symmetric PSD square root; negative eigenvalues from rounding count as zero.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double trace_sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()(i);
    sum += std::sqrt(std::max(ev, 0.0));
  }
  return sum;
}

}  // namespace

double fid(std::span<const FeatureVector> a, std::span<const FeatureVector> b) {
  if (a.empty() || b.empty()) throw InputError("fid needs two non-empty feature sets");
  const Eigen::Index dim = a.front().size();
  check_widths(a, dim);
  check_widths(b, dim);
  const Gaussian ga = fit(a);
  const Gaussian gb = fit(b);
  const Eigen::MatrixXd root_a = sqrt_psd(ga.cov);
  const double cross = trace_sqrt_psd(root_a * gb.cov * root_a);
  const double value =
      (ga.mean - gb.mean).squaredNorm() + ga.cov.trace() + gb.cov.trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

double diversity(std::span<const FeatureVector> set, std::size_t num_pairs, Rng& rng) {
  const std::size_t n = set.size();
  if (n < 2) throw InputError("diversity needs at least two samples");
  if (num_pairs == 0) throw PreconditionError("diversity needs at least one pair");
  check_widths(set, set.front().size());
  double sum = 0.0;
  for (std::size_t p = 0; p < num_pairs; ++p) {
    const auto i = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1);
    auto j = std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n - 1)), n - 2);
    if (j >= i) ++j;
    sum += (set[i] - set[j]).norm();
  }
  return sum / static_cast<double>(num_pairs);
}

double mm_dist(std::span<const FeatureVector> a, std::span<const FeatureVector> b) {
  if (a.size() != b.size()) throw DimensionError("mm_dist needs index-aligned sets of equal size");
  if (a.empty()) throw InputError("mm_dist needs non-empty sets");
  check_widths(a, a.front().size());
  check_widths(b, a.front().size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
  return sum / static_cast<double>(a.size());
}

double r_precision(std::span<const FeatureVector> queries,
                   std::span<const FeatureVector> candidates, std::size_t k, std::size_t batch) {
  if (batch == 0) throw PreconditionError("retrieval batch must be positive");
  if (k == 0 || k > batch) {
    throw PreconditionError(fmt::format("top-k {} must be in [1, {}]", k, batch));
  }
  if (queries.size() != candidates.size()) {
    throw DimensionError("r_precision needs index-aligned sets of equal size");
  }
  if (queries.empty()) throw InputError("r_precision needs non-empty sets");
  check_widths(queries, queries.front().size());
  check_widths(candidates, queries.front().size());
  std::size_t hits = 0;
  for (std::size_t start = 0; start < queries.size(); start += batch) {
    const std::size_t end = std::min(start + batch, queries.size());
    for (std::size_t q = start; q < end; ++q) {
      const double own = (queries[q] - candidates[q]).norm();
      std::size_t rank = 0;
      for (std::size_t c = start; c < end; ++c) {
        if (c == q) continue;
        const double d = (queries[q] - candidates[c]).norm();
        if (d < own || (d == own && c < q)) ++rank;
      }
      if (rank < k) ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(queries.size());
}

std::vector<Vec3> root_positions(const MotionSequence& seq) {
  std::vector<Vec3> out;
  out.reserve(seq.size());
  for (const MotionFrame& f : seq.frames()) out.push_back(f.root.position);
  return out;
}

double root_rmse(std::span<const Vec3> path, std::span<const Vec3> target) {
  if (path.size() != target.size()) {
    throw DimensionError(fmt::format("paths differ in length ({} vs {})", path.size(), target.size()));
  }
  if (path.empty()) throw InputError("root_rmse needs non-empty paths");
  double sum = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) sum += (path[i] - target[i]).head<2>().squaredNorm();
  return std::sqrt(sum / static_cast<double>(path.size()));
}

double root_rmse(const MotionSequence& seq, const MotionSequence& target) {
  const MotionSequence aligned = target.fps() == seq.fps() ? target : resample(target, seq.fps());
  const std::size_t n = std::min(seq.size(), aligned.size());
  const std::vector<Vec3> a = root_positions(seq);
  const std::vector<Vec3> b = root_positions(aligned);
  return root_rmse(std::span(a).first(n), std::span(b).first(n));
}

double genre_score(std::span<const std::vector<FeatureVector>> genres) {
  if (genres.size() < 2) throw InputError("genre score needs at least two genres");
  for (const auto& g : genres) {
    if (g.size() < 2) throw InputError("genre score needs at least two samples per genre");
    check_widths(g, genres.front().front().size());
  }
  double within = 0.0;
  double within_n = 0.0;
  double cross = 0.0;
  double cross_n = 0.0;
  for (std::size_t g = 0; g < genres.size(); ++g) {
    const auto& a = genres[g];
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        within += (a[i] - a[j]).norm();
        within_n += 1.0;
      }
      for (std::size_t h = g + 1; h < genres.size(); ++h) {
        for (const FeatureVector& other : genres[h]) {
          cross += (a[i] - other).norm();
          cross_n += 1.0;
        }
      }
    }
  }
  const double mean_cross = cross / cross_n;
  if (mean_cross == 0.0) return 0.0;
  return std::clamp(1.0 - (within / within_n) / mean_cross, 0.0, 1.0);
}

double success_rate(std::span<const TrialOutcome> trials, const SuccessThresholds& thresholds) {
  if (trials.empty()) throw InputError("success rate needs at least one trial");
  std::size_t ok = 0;
  for (const TrialOutcome& t : trials) {
    if (t.fell) continue;
    bool met = true;
    if (t.task == TaskKind::kText) met = t.mpjpe_cm / 100.0 < thresholds.mpjpe_m;
    if (t.task == TaskKind::kTrajectory) met = t.root_rmse_m < thresholds.root_rmse_m;
    if (met) ++ok;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(trials.size());
}

}  // namespace ua
