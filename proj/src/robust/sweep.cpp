#include "ua/robust/sweep.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/eval/metrics.hpp"

namespace ua {

SweepResult sweep(std::span<const MotionSequence> corpus, const CodecParams& codec,
                  const SweepOptions& options) {
  if (corpus.empty()) throw PreconditionError("sweep needs a non-empty corpus");
  if (!codec.trained) throw PreconditionError("sweep needs a trained codec");
  std::vector<double> scales = options.scales;
  std::sort(scales.begin(), scales.end());

  std::vector<nn::Mat> clean;
  clean.reserve(corpus.size());
  for (const MotionSequence& s : corpus) clean.push_back(dof_matrix(s));

  SweepResult result;
  for (double scale : scales) {
    NoiseConfig noise = options.noise;
    noise.scale = scale;
    SweepPoint p;
    p.scale = scale;
    std::vector<TrialOutcome> trials;
    double mpjpe_sum = 0.0;
    std::size_t improved = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      Rng rng = make_rng(options.seed, i);
      const nn::Mat noisy = corrupt(clean[i], noise, rng);
      const RoundtripError e = roundtrip_error(clean[i], noisy, codec);
      p.raw.push_back(e.raw);
      p.roundtrip.push_back(e.roundtrip);
      if (e.roundtrip < e.raw) ++improved;
      if (options.tracker) {
        std::vector<RootState> roots;
        for (const MotionFrame& f : corpus[i].frames()) roots.push_back(f.root);
        const MotionSequence projected =
            from_dof_matrix(roundtrip(noisy, codec), corpus[i].fps(), roots);
        const TrackResult tr = simulate_track(projected, *options.tracker);
        const MotionSequence reference =
            tr.tracked.fps() == corpus[i].fps() ? corpus[i] : resample(corpus[i], tr.tracked.fps());
        TrialOutcome t;
        t.task = TaskKind::kText;
        t.fell = tr.trial.fell;
        t.mpjpe_cm = mpjpe(tr.tracked, reference, KinematicModel::g1());
        mpjpe_sum += t.mpjpe_cm;
        trials.push_back(t);
      }
    }
    const double n = static_cast<double>(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      p.mean_raw += p.raw[i] / n;
      p.mean_roundtrip += p.roundtrip[i] / n;
    }
    p.improved_fraction = static_cast<double>(improved) / n;
    if (options.tracker) {
      p.mpjpe_cm = mpjpe_sum / n;
      p.success_pct = success_rate(trials);
    }
    result.points.push_back(std::move(p));
  }
  return result;
}

void write_sweep_report(std::ostream& out, const SweepResult& result) {
  out << "# scale raw_rms roundtrip_rms improved_fraction";
  const bool tracked = !result.points.empty() && result.points.front().mpjpe_cm.has_value();
  if (tracked) out << " mpjpe_cm success_pct";
  out << '\n';
  for (const SweepPoint& p : result.points) {
    out << fmt::format("{} {} {} {}", p.scale, p.mean_raw, p.mean_roundtrip, p.improved_fraction);
    if (tracked) out << fmt::format(" {} {}", *p.mpjpe_cm, *p.success_pct);
    out << '\n';
  }
}

}  // namespace ua
