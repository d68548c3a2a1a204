#include "ua/augment/segment.hpp"

#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "ua/common/errors.hpp"

namespace ua {

namespace {

constexpr double kMinSourceSeconds = 4.0;

double root_accel(const MotionSequence& seq, std::size_t i) {
  if (i == 0 || i + 1 >= seq.size()) return 0.0;
  const Vec3 a = seq[i + 1].root.position - 2.0 * seq[i].root.position + seq[i - 1].root.position;
  return a.head<2>().norm() * seq.fps() * seq.fps();
}

}  // namespace

std::vector<MotionClip> segment(const MotionSequence& seq, const SegmentOptions& o, int first_id) {
  if (o.min_cycles < 1 || o.tail_frames < 0 || !(o.min_duration_s > 0.0) ||
      o.max_duration_s < o.min_duration_s) {
    throw ConfigError("invalid segmentation options");
  }
  if (seq.duration() + 1e-9 < kMinSourceSeconds) {
    throw LengthError("segmentation needs at least 4 s of motion");
  }
  const SequenceFeatures feats(seq, o.contact);
  const std::vector<std::size_t>& strikes = feats.left_strikes();
  std::vector<MotionClip> clips;
  if (strikes.size() < 2) {
    spdlog::warn("no gait cycles detected in a {:.1f} s sequence", seq.duration());
    return clips;
  }
  const auto tail = static_cast<std::size_t>(o.tail_frames);
  for (std::size_t k = 0; k < strikes.size(); ++k) {
    const std::size_t start = strikes[k];
    if (root_accel(seq, start) > o.max_root_accel) continue;
    for (std::size_t m = static_cast<std::size_t>(o.min_cycles); k + m < strikes.size(); ++m) {
      const std::size_t last = strikes[k + m] + std::max<std::size_t>(tail, 1) - 1;  // inclusive
      const double duration = static_cast<double>(last - start) / seq.fps();
      if (duration > o.max_duration_s + 1e-9) break;
      if (duration + 1e-9 < o.min_duration_s) continue;
      if (!feats.has_features(last)) break;
      MotionClip clip{.id = first_id + static_cast<int>(clips.size()),
                      .frames = seq.slice(start, last + 1),
                      .source_start = start};
      clip.features.reserve(last + 1 - start);
      double path = 0.0;
      double turn = 0.0;
      for (std::size_t i = start; i <= last; ++i) {
        clip.features.push_back(feats.at(i));
        if (i > start) {
          path += (seq[i].root.position - seq[i - 1].root.position).head<2>().norm();
          turn += wrap_angle(heading_of(seq[i].root.orientation) - heading_of(seq[i - 1].root.orientation));
        }
      }
      clip.mean_speed = path / duration;
      clip.total_turn_deg = turn * 180.0 / std::numbers::pi;
      clips.push_back(std::move(clip));
      break;
    }
  }
  return clips;
}

std::vector<MotionClip> build_library(std::span<const MotionSequence> sequences,
                                      const SegmentOptions& options) {
  std::vector<MotionClip> library;
  for (const MotionSequence& s : sequences) {
    std::vector<MotionClip> clips = segment(s, options, static_cast<int>(library.size()));
    for (MotionClip& c : clips) library.push_back(std::move(c));
  }
  return library;
}

}  // namespace ua
