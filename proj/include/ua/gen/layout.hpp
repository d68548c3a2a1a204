#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/common/rng.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {

inline constexpr int kDefaultConditionWindow = 50;

// Condition inputs as local ids of their modality. Text is never windowed;
// music and trajectory are cut to a random window.
struct Conditions {
  std::optional<std::vector<TokenId>> text;
  std::optional<std::vector<TokenId>> music;
  std::optional<std::vector<TokenId>> trajectory;
};

struct ConditionSegment {
  Modality modality;
  std::vector<TokenId> tokens;  // global ids, delimiters excluded
  bool operator==(const ConditionSegment&) const = default;
};

// Flattened form:
//   [<open> cond... <close>]* SOM motion... EOM
// with segments in text, music, trajectory order. All ids are global.
struct SequenceLayout {
  std::vector<ConditionSegment> conditions;
  std::vector<TokenId> motion;  // global motion ids

  std::vector<TokenId> flatten() const;
  // Condition segments followed by SOM: the prompt a generator continues.
  std::vector<TokenId> prompt() const;
  bool operator==(const SequenceLayout&) const = default;
};

TokenId open_delimiter(Modality m);
TokenId close_delimiter(Modality m);

// Builds a layout from local ids. Throws PreconditionError when `window`
// exceeds a windowed modality's length or is not positive, RangeError for
// ids outside a modality.
SequenceLayout assemble(const Conditions& conditions, std::span<const TokenId> motion_local,
                        int window, Rng& rng);

// Inverse of flatten. Throws ParseError on unbalanced delimiters, ids of the
// wrong modality inside a segment, a missing SOM/EOM, or trailing ids.
SequenceLayout parse_layout(std::span<const TokenId> flat);

// Token corpus file: one flattened sequence per line, space-separated ids.
void write_token_corpus(std::ostream& out, std::span<const SequenceLayout> corpus);
void write_token_corpus(const std::filesystem::path& path, std::span<const SequenceLayout> corpus);
std::vector<SequenceLayout> read_token_corpus(std::istream& in);
std::vector<SequenceLayout> read_token_corpus(const std::filesystem::path& path);

}  // namespace ua
