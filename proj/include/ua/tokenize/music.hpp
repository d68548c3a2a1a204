#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ua/codec/codec.hpp"

namespace ua {

inline constexpr double kMusicFps = 30.0;
inline constexpr int kMusicFeatureDim = 35;

// Column layout of a 35-wide music feature frame.
namespace music_col {
inline constexpr int kEnvelope = 0;
inline constexpr int kMfcc = 1;     // 20 values
inline constexpr int kChroma = 21;  // 12 values
inline constexpr int kBeatPeak = 33;
inline constexpr int kOnset = 34;
}  // namespace music_col

// Music features as a (35 x frames) matrix at 30 Hz.
using MusicFeatures = nn::Mat;

struct OnsetOptions {
  double threshold = 0.3;   // on flux normalized by its maximum over the clip
  double min_flux = 1e-6;   // absolute flux floor, per analysis sample
  int beat_radius = 7;      // frames either side for beat_peak maxima
};

// Envelope, onset and beat_peak columns from mono PCM; MFCC and chroma
// columns are zero. Frame t is centred on sample t * sample_rate / 30 and
// analyses the in-bounds part of a window two hops long. Throws
// PreconditionError for sample rates below 8 kHz.
MusicFeatures extract_envelope_onsets(std::span<const double> pcm, double sample_rate,
                                      const OnsetOptions& options = {});

// Throws ConfigError when the codec is untrained or not 35 wide. Pads with
// the last frame to a multiple of the downsample factor.
std::vector<TokenId> tokenize_music(const MusicFeatures& features, const CodecParams& codec);

// Music feature file: `UAMUSIC 1 30 <n>` then 35 values per line.
void write_music(std::ostream& out, const MusicFeatures& features);
void write_music(const std::filesystem::path& path, const MusicFeatures& features);
MusicFeatures read_music(std::istream& in);
MusicFeatures read_music(const std::filesystem::path& path);

}  // namespace ua
