#include "ua/augment/synthesize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace ua {

namespace {

double ease(double u) { return u * u * (3.0 - 2.0 * u); }

double lerp(double a, double b, double w) {
  if (w == 0.0) return a;
  if (w == 1.0) return b;
  return a + w * (b - a);
}

struct StepStats {
  double dof = 0.0;
  double root = 0.0;
};

StepStats step_stats(const MotionFrame& a, const MotionFrame& b) {
  StepStats s;
  for (std::size_t j = 0; j < kNumDofs; ++j) s.dof = std::max(s.dof, std::abs(b.dofs[j] - a.dofs[j]));
  s.root = (b.root.position - a.root.position).norm();
  return s;
}

bool finite(const MotionFrame& f) {
  return f.dofs.all_finite() && f.root.position.allFinite() && f.root.orientation.coeffs().allFinite();
}

// Largest horizontal speed of a foot that stays below the contact height
// across consecutive frames.
double foot_slide(std::span<const MotionFrame> frames, double fps, const ContactOptions& contact) {
  const KinematicModel& model = KinematicModel::g1();
  static const std::array<std::size_t, 2> feet{*model.find("left_foot"), *model.find("right_foot")};
  double worst = 0.0;
  std::vector<Vec3> prev;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::vector<Vec3> p = forward_kinematics(model, frames[i].dofs, frames[i].root);
    if (i > 0) {
      for (std::size_t f : feet) {
        if (p[f].z() < contact.height && prev[f].z() < contact.height) {
          worst = std::max(worst, (p[f] - prev[f]).head<2>().norm() * fps);
        }
      }
    }
    prev = std::move(p);
  }
  return worst;
}

void validate_library(std::span<const MotionClip> library, int blend_frames) {
  if (library.empty()) throw PreconditionError("synthesis needs a non-empty clip library");
  const double fps = library.front().frames.fps();
  for (const MotionClip& c : library) {
    if (c.frames.fps() != fps) throw PreconditionError("library clips differ in fps");
    if (c.features.size() != c.frames.size()) {
      throw PreconditionError(fmt::format("clip {} lacks per-frame features", c.id));
    }
    if (c.frames.size() <= 2 * static_cast<std::size_t>(blend_frames)) {
      throw PreconditionError(fmt::format("clip {} is shorter than two blend windows", c.id));
    }
  }
}

}  // namespace

void SynthesisOptions::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("synthesis duration must be positive");
  if (blend_frames < 2) throw ConfigError("blend_frames must be at least 2");
  if (history_capacity == 0 || reuse_window > history_capacity) {
    throw ConfigError("reuse_window must not exceed a positive history capacity");
  }
  if (!(max_dof_delta > 0.0) || !(max_root_jump > 0.0)) throw ConfigError("QC bounds must be positive");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
}

std::vector<MotionFrame> blend(std::span<const MotionFrame> tail, std::span<const MotionFrame> head,
                               int blend_frames) {
  if (blend_frames < 2) throw PreconditionError("blend needs at least two frames");
  const auto n = static_cast<std::size_t>(blend_frames);
  if (tail.size() < n || head.size() < n) {
    throw PreconditionError(fmt::format("blend needs {} frames on both sides", blend_frames));
  }
  std::vector<MotionFrame> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = ease(static_cast<double>(i) / static_cast<double>(n - 1));
    const MotionFrame& a = tail[i];
    const MotionFrame& b = head[i];
    MotionFrame& f = out[i];
    for (std::size_t j = 0; j < kNumDofs; ++j) f.dofs[j] = lerp(a.dofs[j], b.dofs[j], w);
    for (int k = 0; k < 3; ++k) f.root.position[k] = lerp(a.root.position[k], b.root.position[k], w);
    f.root.orientation = slerp(a.root.orientation, b.root.orientation, w);
  }
  return out;
}

std::vector<MotionFrame> reanchor(std::span<const MotionFrame> frames, const RootState& from,
                                  const RootState& to) {
  const Quat turn = yaw_quat(heading_of(to.orientation) - heading_of(from.orientation));
  std::vector<MotionFrame> out(frames.begin(), frames.end());
  for (MotionFrame& f : out) {
    Vec3 rel = f.root.position - from.position;
    rel.z() = 0.0;
    const Vec3 moved = turn * rel;
    f.root.position = Vec3(to.position.x() + moved.x(), to.position.y() + moved.y(), f.root.position.z());
    f.root.orientation = (turn * f.root.orientation).normalized();
  }
  return out;
}

SynthesisResult synthesize(std::span<const MotionClip> library, const SynthesisOptions& o) {
  o.validate();
  validate_library(library, o.blend_frames);
  const double fps = library.front().frames.fps();
  const auto target_frames = static_cast<std::size_t>(std::lround(o.duration_s * fps)) + 1;
  const auto b = static_cast<std::size_t>(o.blend_frames);
  Rng rng = make_rng(o.seed);
  HistoryBuffer history(o.history_capacity, o.penalty_weight);

  std::vector<MotionFrame> out;
  out.reserve(target_frames + 4 * library.front().frames.size());
  QcReport qc;
  std::vector<int> chosen;

  std::size_t cur_index = std::min(static_cast<std::size_t>(uniform01(rng) * library.size()),
                                    library.size() - 1);
  history.push(library[cur_index].id);
  chosen.push_back(library[cur_index].id);
  RootState origin;
  origin.position.z() = library[cur_index].frames[0].root.position.z();
  std::vector<MotionFrame> cur =
      reanchor(library[cur_index].frames.frames(), library[cur_index].frames[0].root, origin);
  out.insert(out.end(), cur.begin(), cur.end() - static_cast<std::ptrdiff_t>(b));

  auto partial = [&]() {
    std::vector<MotionFrame> frames = out;
    frames.insert(frames.end(), cur.end() - static_cast<std::ptrdiff_t>(b), cur.end());
    return std::make_shared<const MotionSequence>(fps, std::move(frames));
  };

  while (out.size() + b < target_frames) {
    const MotionClip& current = library[cur_index];
    const std::size_t handoff = cur.size() - b;
    MatchFeature query = current.features[handoff];
    const std::size_t out_index = out.size();
    if (out_index + static_cast<std::size_t>(kFutureOffsets.back()) < o.target_path.size()) {
      const RootState& root = cur[handoff].root;
      const Quat inv = yaw_quat(heading_of(root.orientation)).conjugate();
      for (std::size_t k = 0; k < kFutureOffsets.size(); ++k) {
        const Vec3& p = o.target_path[out_index + static_cast<std::size_t>(kFutureOffsets[k])];
        query.trajectory.segment<2>(2 * static_cast<Eigen::Index>(k)) = (inv * (p - root.position)).head<2>();
      }
    }

    std::vector<Candidate> candidates;
    std::vector<std::size_t> index_of;
    for (std::size_t i = 0; i < library.size(); ++i) {
      if (history.contains_within(library[i].id, o.reuse_window)) continue;
      candidates.push_back({library[i].id, match_cost(query, library[i].features.front(), o.weights)});
      index_of.push_back(i);
    }

    TransitionQc t;
    t.output_frame = out_index;
    t.from_clip = current.id;
    std::vector<MotionFrame> next;
    std::vector<MotionFrame> blended;
    std::size_t next_index = 0;
    while (true) {
      if (candidates.empty()) {
        throw SynthesisError(
            fmt::format("every candidate after clip {} was filtered by QC", current.id), partial());
      }
      HistoryBuffer trial = history;
      const int id = select_next(candidates, trial, rng, o.temperature);
      const auto pos = static_cast<std::size_t>(
          std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.id == id; }) -
          candidates.begin());
      next_index = index_of[pos];
      const MotionClip& clip = library[next_index];
      next = reanchor(clip.frames.frames(), clip.frames[0].root, cur[handoff].root);
      blended = blend(std::span(cur).subspan(handoff), next, o.blend_frames);

      StepStats worst;
      bool ok = std::all_of(blended.begin(), blended.end(), finite);
      const MotionFrame* prev = &out.back();
      for (std::size_t i = 0; i <= b; ++i) {
        const MotionFrame& f = i < b ? blended[i] : next[b];
        const StepStats s = step_stats(*prev, f);
        worst.dof = std::max(worst.dof, s.dof);
        worst.root = std::max(worst.root, s.root);
        prev = &f;
      }
      ok = ok && worst.dof <= o.max_dof_delta && worst.root <= o.max_root_jump;
      if (!ok) {
        ++t.rejected;
        ++qc.filtered;
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pos));
        index_of.erase(index_of.begin() + static_cast<std::ptrdiff_t>(pos));
        continue;
      }
      history = trial;
      t.to_clip = id;
      t.cost = candidates[pos].cost;
      t.max_dof_delta = worst.dof;
      t.max_root_jump = worst.root;
      break;
    }

    std::vector<MotionFrame> window{out.back()};
    window.insert(window.end(), blended.begin(), blended.end());
    window.push_back(next[b]);
    t.foot_slide = foot_slide(window, fps, o.contact);
    qc.transitions.push_back(t);

    out.insert(out.end(), blended.begin(), blended.end());
    out.insert(out.end(), next.begin() + static_cast<std::ptrdiff_t>(b),
               next.end() - static_cast<std::ptrdiff_t>(b));
    chosen.push_back(t.to_clip);
    cur = std::move(next);
    cur_index = next_index;
  }
  out.insert(out.end(), cur.end() - static_cast<std::ptrdiff_t>(b), cur.end());

  SynthesisResult result{MotionSequence(fps, std::move(out)), std::move(chosen), std::move(qc)};
  audit(result, o);
  return result;
}

void audit(SynthesisResult& result, const SynthesisOptions& o) {
  QcReport& qc = result.qc;
  qc.max_dof_delta = 0.0;
  qc.max_root_jump = 0.0;
  qc.dof_violations = 0;
  qc.root_violations = 0;
  qc.reuse_violations = 0;
  qc.non_finite_frames = 0;
  const auto frames = result.motion.frames();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!finite(frames[i])) ++qc.non_finite_frames;
    if (i == 0) continue;
    const StepStats s = step_stats(frames[i - 1], frames[i]);
    qc.max_dof_delta = std::max(qc.max_dof_delta, s.dof);
    qc.max_root_jump = std::max(qc.max_root_jump, s.root);
    if (s.dof > o.max_dof_delta) ++qc.dof_violations;
    if (s.root > o.max_root_jump) ++qc.root_violations;
  }
  for (std::size_t i = 0; i < result.clips.size(); ++i) {
    const std::size_t from = i >= o.reuse_window ? i - o.reuse_window : 0;
    for (std::size_t k = from; k < i; ++k) {
      if (result.clips[k] == result.clips[i]) {
        ++qc.reuse_violations;
        break;
      }
    }
  }
  double slide = 0.0;
  for (const TransitionQc& t : qc.transitions) slide += t.foot_slide;
  qc.mean_foot_slide = qc.transitions.empty() ? 0.0 : slide / static_cast<double>(qc.transitions.size());
}

void write_qc_report(std::ostream& out, const QcReport& qc) {
  out << fmt::format("transitions {}\n", qc.transitions.size());
  out << fmt::format("filtered_transitions {}\n", qc.filtered);
  out << fmt::format("max_dof_delta {}\n", qc.max_dof_delta);
  out << fmt::format("max_root_jump {}\n", qc.max_root_jump);
  out << fmt::format("mean_foot_slide {}\n", qc.mean_foot_slide);
  out << fmt::format("dof_violations {}\n", qc.dof_violations);
  out << fmt::format("root_violations {}\n", qc.root_violations);
  out << fmt::format("reuse_violations {}\n", qc.reuse_violations);
  out << fmt::format("non_finite_frames {}\n", qc.non_finite_frames);
  for (const TransitionQc& t : qc.transitions) {
    out << fmt::format("transition frame={} from={} to={} cost={} foot_slide={} max_dof_delta={} "
                       "max_root_jump={} rejected={}\n",
                       t.output_frame, t.from_clip, t.to_clip, t.cost, t.foot_slide, t.max_dof_delta,
                       t.max_root_jump, t.rejected);
  }
}

}  // namespace ua
