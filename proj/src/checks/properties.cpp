#include "ua/checks/properties.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <fmt/format.h>

#include "ua/causal/causal_decoder.hpp"
#include "ua/codec/codec.hpp"
#include "ua/codec/fsq.hpp"
#include "ua/codec/train.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"

namespace ua {
namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

nn::Mat uniform_matrix(int rows, int cols, Rng& rng) {
  nn::Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng) * 2.0 - 1.0;
  return m;
}

nn::Mat hcat(const nn::Mat& a, const nn::Mat& b) {
  nn::Mat out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

CheckResult check_fsq_bijection() {
  Timer timer;
  CheckResult r{"fsq_bijection", true, "", 0.0};
  const Levels levels = CodecConfig{}.levels;
  const std::int64_t n = codebook_size(levels);
  std::set<LatentCode> seen;
  std::int64_t failures = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const LatentCode code = index_code(i, levels);
    if (code_index(code, levels) != i) ++failures;
    seen.insert(code);
  }
  r.passed = failures == 0 && static_cast<std::int64_t>(seen.size()) == n && n == 15360;
  r.seconds = timer.seconds();
  r.detail = fmt::format("codebook {} distinct {} mismatches {}", n, seen.size(), failures);
  return r;
}

CheckResult check_codec_gradients(std::uint64_t seed) {
  Timer timer;
  CheckResult r{"codec_gradients", true, "", 0.0};
  double worst = 0.0;
  for (int ds : {2, 4}) {
    CodecConfig cfg;
    cfg.hidden_channels = 16;
    cfg.group_norm_groups = 4;
    cfg.downsample = ds;
    CodecParams p = init_codec(cfg, seed, false);
    Rng rng = make_rng(seed, 9);
    // Move norms and biases away from their identity initialisation.
    for (nn::Mat* t : p.tensors())
      for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] += 0.1 * (uniform01(rng) - 0.5);
    Rng probe_rng = make_rng(seed + 1);
    const nn::Mat probe = uniform_matrix(cfg.input_dim, 2 * 8, probe_rng);
    worst = std::max(worst, gradient_check(p, probe, {2, 8}, 1e-5, 200, seed));
  }
  r.passed = worst < 1e-4;
  r.seconds = timer.seconds();
  r.detail = fmt::format("max relative error {:.3e} (< 1e-4)", worst);
  return r;
}

CheckResult check_causality(std::size_t sequences, std::uint64_t seed) {
  Timer timer;
  CheckResult r{"causality", true, "", 0.0};
  CausalConfig cfg;
  cfg.hidden = 32;
  const CausalDecoderParams params = init_causal(cfg, seed);
  const auto codes = static_cast<double>(codebook_size(cfg.levels));
  Rng rng = make_rng(seed, 1);
  std::size_t failures = 0;
  for (std::size_t s = 0; s < sequences; ++s) {
    const auto len = 1 + static_cast<std::size_t>(uniform01(rng) * 40);
    std::vector<TokenId> tokens(len);
    for (auto& t : tokens) t = static_cast<TokenId>(uniform01(rng) * codes);
    const nn::Mat whole = decode_causal(tokens, params);

    StreamState state(params);
    nn::Mat got(cfg.input_dim, 0);
    std::size_t at = 0;
    bool ok = true;
    while (at < len) {
      const auto part = std::min(len - at, static_cast<std::size_t>(uniform01(rng) * 8));
      got = hcat(got, push_tokens(state, std::span(tokens).subspan(at, part), params));
      at += part;
      // Frames already emitted never change.
      if (!(got == whole.leftCols(got.cols()))) ok = false;
    }
    got = hcat(got, flush(state, params));
    if (!(got == whole)) ok = false;
    const std::size_t cut = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(len));
    const nn::Mat prefix = decode_causal(std::span(tokens).first(std::min(cut, len)), params);
    if (!(prefix == whole.leftCols(prefix.cols()))) ok = false;
    if (!ok) ++failures;
  }
  r.passed = failures == 0;
  r.seconds = timer.seconds();
  r.detail = fmt::format("{} sequences, {} mismatches", sequences, failures);
  return r;
}

}  // namespace ua
