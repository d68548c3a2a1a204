#include "ua/motion/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "ua/common/rng.hpp"

namespace ua {

namespace {

struct Component {
  double harmonic;
  double amplitude;
  double phase;
};

struct Style {
  double base_hz;
  std::array<std::vector<Component>, kNumDofs> dofs;
};

Style make_style(Rng& rng) {
  Style s;
  s.base_hz = 0.4 + 0.8 * uniform01(rng);
  for (auto& comps : s.dofs) {
    const int count = 1 + static_cast<int>(uniform01(rng) * 3.0);
    const double budget = 0.2 + 0.8 * uniform01(rng);
    std::vector<double> weights(static_cast<std::size_t>(count));
    double total = 0.0;
    for (double& w : weights) {
      w = 0.2 + uniform01(rng);
      total += w;
    }
    for (int k = 0; k < count; ++k) {
      Component c;
      c.harmonic = 1.0 + std::floor(uniform01(rng) * 3.0);
      c.amplitude = budget * weights[static_cast<std::size_t>(k)] / total;
      c.phase = 2.0 * std::numbers::pi * uniform01(rng);
      comps.push_back(c);
    }
  }
  return s;
}

}  // namespace

std::vector<MotionSequence> sinusoid_corpus(const SinusoidCorpusOptions& options) {
  Rng style_rng = make_rng(options.seed, 0);
  std::vector<Style> styles;
  for (std::size_t i = 0; i < options.num_styles; ++i) styles.push_back(make_style(style_rng));

  Rng rng = make_rng(options.seed, 1);
  std::vector<MotionSequence> corpus;
  corpus.reserve(options.num_sequences);
  for (std::size_t n = 0; n < options.num_sequences; ++n) {
    const Style& style = styles[static_cast<std::size_t>(uniform01(rng) * styles.size())];
    const double tempo = 0.9 + 0.2 * uniform01(rng);
    const double offset = 2.0 * std::numbers::pi * uniform01(rng);
    const double gain = 0.8 + 0.2 * uniform01(rng);
    std::vector<MotionFrame> frames(options.frames);
    for (std::size_t t = 0; t < options.frames; ++t) {
      const double time = static_cast<double>(t) / options.fps;
      for (std::size_t d = 0; d < kNumDofs; ++d) {
        double v = 0.0;
        for (const auto& c : style.dofs[d]) {
          v += c.amplitude * std::sin(2.0 * std::numbers::pi * c.harmonic * style.base_hz * tempo *
                                          time +
                                      c.phase + c.harmonic * offset);
        }
        frames[t].dofs[d] = gain * v;
      }
    }
    corpus.emplace_back(options.fps, std::move(frames));
  }
  return corpus;
}

std::vector<MotionSequence> constant_corpus(std::size_t count, std::size_t frames,
                                            std::uint64_t seed) {
  Rng rng = make_rng(seed);
  MotionFrame pose;
  for (std::size_t d = 0; d < kNumDofs; ++d) pose.dofs[d] = uniform01(rng) - 0.5;
  std::vector<MotionSequence> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.emplace_back(kCanonicalFps, std::vector<MotionFrame>(frames, pose));
  }
  return out;
}

}  // namespace ua
