#include "ua/tokenize/music.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>

#include <fftw3.h>
#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  // Magnitude spectrum of the current input.
  void magnitudes(std::vector<double>& mag) {
    fftw_execute(plan_);
    mag.resize(static_cast<std::size_t>(n_ / 2 + 1));
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out_[k][0], out_[k][1]);
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

MusicFeatures extract_envelope_onsets(std::span<const double> pcm, double sample_rate,
                                      const OnsetOptions& options) {
  if (!(sample_rate >= 8000.0)) {
    throw PreconditionError(fmt::format("sample rate {} below 8 kHz", sample_rate));
  }
  if (pcm.empty()) return MusicFeatures(kMusicFeatureDim, 0);

  const double hop = sample_rate / kMusicFps;
  const int half = static_cast<int>(std::lround(hop));
  const int window = 2 * half;
  const auto n = static_cast<long long>(pcm.size());
  const auto frames = static_cast<Eigen::Index>(std::floor(static_cast<double>(n - 1) / hop) + 1);

  std::vector<double> hann(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) {
    hann[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / window);
  }

  double hann_sum = 0.0;
  for (double w : hann) hann_sum += w;

  MusicFeatures out = MusicFeatures::Zero(kMusicFeatureDim, frames);
  RealFft fft(window);
  std::vector<double> mag;
  std::vector<double> prev;
  std::vector<double> flux(static_cast<std::size_t>(frames), 0.0);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const long long start = static_cast<long long>(std::floor(static_cast<double>(t) * hop)) - half;
    double sum_sq = 0.0;
    double weight = 0.0;
    int inside = 0;
    double* buf = fft.input();
    for (int i = 0; i < window; ++i) {
      const long long s = start + i;
      double v = 0.0;
      if (s >= 0 && s < n) {
        v = pcm[static_cast<std::size_t>(s)];
        sum_sq += v * v;
        weight += hann[static_cast<std::size_t>(i)];
        ++inside;
      }
      buf[i] = v * hann[static_cast<std::size_t>(i)];
    }
    out(music_col::kEnvelope, t) = inside > 0 ? std::sqrt(sum_sq / inside) : 0.0;
    fft.magnitudes(mag);
    // Edge frames see part of the window; rescale to full-window level so
    // a stationary signal has a flat spectrum across the clip boundary.
    if (weight > 0.0) {
      for (double& m : mag) m *= hann_sum / weight;
    }
    if (prev.empty()) prev.assign(mag.size(), 0.0);
    double f = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) f += std::max(0.0, mag[k] - prev[k]);
    flux[static_cast<std::size_t>(t)] = f / window;
    prev.swap(mag);
  }

  const double peak = *std::max_element(flux.begin(), flux.end());
  if (peak <= options.min_flux) return out;
  std::vector<double> strength(flux.size());
  for (std::size_t t = 0; t < flux.size(); ++t) strength[t] = flux[t] / peak;

  const auto count = static_cast<long long>(flux.size());
  for (long long t = 0; t < count; ++t) {
    const double s = strength[static_cast<std::size_t>(t)];
    if (flux[static_cast<std::size_t>(t)] <= options.min_flux || s < options.threshold) continue;
    const double left = t > 0 ? strength[static_cast<std::size_t>(t - 1)] : 0.0;
    const double right = t + 1 < count ? strength[static_cast<std::size_t>(t + 1)] : 0.0;
    if (s <= left || s < right) continue;
    out(music_col::kOnset, t) = 1.0;
    bool is_max = true;
    for (long long u = std::max(0LL, t - options.beat_radius);
         u <= std::min(count - 1, t + options.beat_radius); ++u) {
      if (strength[static_cast<std::size_t>(u)] > s) is_max = false;
    }
    if (is_max) out(music_col::kBeatPeak, t) = 1.0;
  }
  return out;
}

std::vector<TokenId> tokenize_music(const MusicFeatures& features, const CodecParams& codec) {
  if (!codec.trained) throw ConfigError("music codec is untrained");
  if (codec.config.input_dim != kMusicFeatureDim) {
    throw ConfigError(fmt::format("music codec must take {} features, not {}", kMusicFeatureDim,
                                  codec.config.input_dim));
  }
  if (features.cols() == 0) return {};
  return encode(pad_to_multiple(features, codec.config.downsample), codec);
}

void write_music(std::ostream& out, const MusicFeatures& features) {
  if (features.rows() != kMusicFeatureDim) throw DimensionError("music features must be 35 wide");
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "UAMUSIC 1 30 {}\n", features.cols());
  for (Eigen::Index t = 0; t < features.cols(); ++t) {
    for (Eigen::Index i = 0; i < kMusicFeatureDim; ++i) {
      if (i > 0) buf.push_back(' ');
      fmt::format_to(std::back_inserter(buf), "{}", features(i, t));
    }
    buf.push_back('\n');
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("failed to write music features");
}

void write_music(const std::filesystem::path& path, const MusicFeatures& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  write_music(out, features);
}

MusicFeatures read_music(std::istream& in) {
  auto header = text_io::expect_header(in, "UAMUSIC", "1", 2);
  if (text_io::parse_double(header[0]) != kMusicFps) throw ParseError("music features must be 30 Hz");
  const long long n = text_io::parse_int(header[1]);
  if (n < 0) throw ParseError("negative music frame count");
  MusicFeatures m(kMusicFeatureDim, n);
  std::string line;
  for (long long t = 0; t < n; ++t) {
    if (!text_io::next_line(in, line)) throw ParseError("music file truncated");
    auto tok = text_io::split_ws(line);
    if (tok.size() != kMusicFeatureDim) {
      throw ParseError(fmt::format("music frame {} has {} values, expected 35", t, tok.size()));
    }
    for (int i = 0; i < kMusicFeatureDim; ++i) {
      m(i, t) = text_io::parse_double(tok[static_cast<std::size_t>(i)]);
    }
    for (int col : {music_col::kBeatPeak, music_col::kOnset}) {
      if (m(col, t) != 0.0 && m(col, t) != 1.0) {
        throw ParseError(fmt::format("music frame {} has a non-binary flag", t));
      }
    }
  }
  return m;
}

MusicFeatures read_music(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return read_music(in);
}

}  // namespace ua
