#include "ua/gen/layout.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"

namespace ua {

TokenId open_delimiter(Modality m) {
  switch (m) {
    case Modality::kText: return kTextOpen;
    case Modality::kMusic: return kMusicOpen;
    case Modality::kTrajectory: return kTrajectoryOpen;
    default: throw PreconditionError(fmt::format("{} is not a condition", modality_name(m)));
  }
}

TokenId close_delimiter(Modality m) { return open_delimiter(m) + 1; }

std::vector<TokenId> SequenceLayout::prompt() const {
  std::vector<TokenId> out;
  for (const ConditionSegment& seg : conditions) {
    out.push_back(open_delimiter(seg.modality));
    out.insert(out.end(), seg.tokens.begin(), seg.tokens.end());
    out.push_back(close_delimiter(seg.modality));
  }
  out.push_back(kSom);
  return out;
}

std::vector<TokenId> SequenceLayout::flatten() const {
  std::vector<TokenId> out = prompt();
  out.insert(out.end(), motion.begin(), motion.end());
  out.push_back(kEom);
  return out;
}

namespace {

ConditionSegment make_segment(Modality m, std::span<const TokenId> local) {
  ConditionSegment seg{m, {}};
  seg.tokens.reserve(local.size());
  for (TokenId id : local) seg.tokens.push_back(to_global(m, id));
  return seg;
}

std::span<const TokenId> random_window(std::span<const TokenId> tokens, int window, Rng& rng,
                                       Modality m) {
  if (window <= 0) throw PreconditionError("condition window must be positive");
  if (static_cast<std::size_t>(window) > tokens.size()) {
    throw PreconditionError(fmt::format("window {} exceeds {} length {}", window,
                                        modality_name(m), tokens.size()));
  }
  const std::size_t starts = tokens.size() - static_cast<std::size_t>(window) + 1;
  const auto start = std::min(starts - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(starts)));
  return tokens.subspan(start, static_cast<std::size_t>(window));
}

}  // namespace

SequenceLayout assemble(const Conditions& conditions, std::span<const TokenId> motion_local,
                        int window, Rng& rng) {
  SequenceLayout layout;
  if (conditions.text) {
    for (TokenId id : *conditions.text) {
      if (id < 0 || id > kMaxWordId) throw RangeError(fmt::format("text id {} is not a word", id));
    }
    layout.conditions.push_back(make_segment(Modality::kText, *conditions.text));
  }
  if (conditions.music) {
    layout.conditions.push_back(make_segment(
        Modality::kMusic, random_window(*conditions.music, window, rng, Modality::kMusic)));
  }
  if (conditions.trajectory) {
    layout.conditions.push_back(make_segment(
        Modality::kTrajectory,
        random_window(*conditions.trajectory, window, rng, Modality::kTrajectory)));
  }
  layout.motion = make_segment(Modality::kMotion, motion_local).tokens;
  return layout;
}

SequenceLayout parse_layout(std::span<const TokenId> flat) {
  SequenceLayout layout;
  std::size_t i = 0;
  const Modality order[] = {Modality::kText, Modality::kMusic, Modality::kTrajectory};
  std::size_t next_modality = 0;
  while (i < flat.size() && flat[i] != kSom) {
    const TokenId open = flat[i];
    std::size_t which = next_modality;
    while (which < 3 && open_delimiter(order[which]) != open) ++which;
    if (which == 3) throw ParseError(fmt::format("unexpected id {} before SOM", open));
    next_modality = which + 1;
    const Modality m = order[which];
    ConditionSegment seg{m, {}};
    ++i;
    while (i < flat.size() && flat[i] != close_delimiter(m)) {
      const TokenId id = flat[i];
      bool ok = false;
      if (m == Modality::kText) {
        ok = id >= 0 && id <= kMaxWordId;
      } else if (id >= 0 && id < kVocabSize) {
        ok = from_global(id).modality == m;
      }
      if (!ok) throw ParseError(fmt::format("id {} inside a {} segment", id, modality_name(m)));
      seg.tokens.push_back(id);
      ++i;
    }
    if (i == flat.size()) throw ParseError(fmt::format("unclosed {} segment", modality_name(m)));
    ++i;
    layout.conditions.push_back(std::move(seg));
  }
  if (i == flat.size()) throw ParseError("sequence lacks SOM");
  ++i;
  while (i < flat.size() && flat[i] != kEom) {
    if (!is_motion(flat[i])) throw ParseError(fmt::format("non-motion id {} after SOM", flat[i]));
    layout.motion.push_back(flat[i++]);
  }
  if (i == flat.size()) throw ParseError("sequence lacks EOM");
  if (i + 1 != flat.size()) throw ParseError("ids after EOM");
  return layout;
}

void write_token_corpus(std::ostream& out, std::span<const SequenceLayout> corpus) {
  for (const SequenceLayout& layout : corpus) {
    out << fmt::format("{}\n", fmt::join(layout.flatten(), " "));
  }
  if (!out) throw InputError("failed to write token corpus");
}

void write_token_corpus(const std::filesystem::path& path, std::span<const SequenceLayout> corpus) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  write_token_corpus(out, corpus);
}

std::vector<SequenceLayout> read_token_corpus(std::istream& in) {
  std::vector<SequenceLayout> corpus;
  std::string line;
  while (text_io::next_line(in, line)) {
    std::vector<TokenId> flat;
    for (auto tok : text_io::split_ws(line)) flat.push_back(text_io::parse_int(tok));
    corpus.push_back(parse_layout(flat));
  }
  return corpus;
}

std::vector<SequenceLayout> read_token_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return read_token_corpus(in);
}

}  // namespace ua
