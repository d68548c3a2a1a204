#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ua/eval/pd.hpp"
#include "ua/robust/noise.hpp"

namespace ua {

struct SweepOptions {
  std::vector<double> scales{1.0, 2.0, 4.0, 8.0};
  NoiseConfig noise;  // scale is overridden per point
  std::uint64_t seed = 0;
  // When set, the roundtrip output is tracked with the PD simulator and
  // compared against the clean sequence.
  std::optional<PdConfig> tracker;
};

struct SweepPoint {
  double scale = 0.0;
  std::vector<double> raw;        // per sequence
  std::vector<double> roundtrip;  // per sequence
  double mean_raw = 0.0;
  double mean_roundtrip = 0.0;
  double improved_fraction = 0.0;  // sequences with roundtrip < raw
  std::optional<double> mpjpe_cm;
  std::optional<double> success_pct;
};

struct SweepResult {
  std::vector<SweepPoint> points;  // ascending scale
};

// Sequence i draws its noise from stream i of the seed at every scale, so
// raw error grows with scale sequence by sequence.
// Throws PreconditionError on an empty corpus or an untrained codec.
SweepResult sweep(std::span<const MotionSequence> corpus, const CodecParams& codec,
                  const SweepOptions& options);

// One line per scale: `scale raw roundtrip improved [mpjpe_cm success_pct]`.
void write_sweep_report(std::ostream& out, const SweepResult& result);

}  // namespace ua
