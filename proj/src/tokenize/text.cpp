#include "ua/tokenize/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {

namespace {

const std::pair<const char*, TokenId> kDelimiters[] = {
    {"<text>", kTextOpen},   {"</text>", kTextClose}, {"<music>", kMusicOpen},
    {"</music>", kMusicClose}, {"<traj>", kTrajectoryOpen}, {"</traj>", kTrajectoryClose},
};

}  // namespace

std::vector<std::string> normalize_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) && c < 128) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TextVocab::TextVocab() {
  add(std::string(kUnknown), 0);
  for (const auto& [w, id] : kDelimiters) add(w, id);
}

void TextVocab::add(std::string word, TokenId id) {
  if (!ids_.emplace(word, id).second) throw ParseError(fmt::format("duplicate word '{}'", word));
  auto pos = std::lower_bound(words_.begin(), words_.end(), id,
                              [](const auto& e, TokenId v) { return e.first < v; });
  if (pos != words_.end() && pos->first == id) {
    throw ParseError(fmt::format("duplicate text id {}", id));
  }
  words_.insert(pos, {id, std::move(word)});
}

TextVocab TextVocab::build(std::span<const std::string> corpus, std::size_t max_words) {
  if (max_words > static_cast<std::size_t>(kMaxWordId)) {
    throw ConfigError(fmt::format("at most {} words fit below the delimiters", kMaxWordId));
  }
  std::map<std::string, std::size_t> counts;
  for (const std::string& line : corpus) {
    for (std::string& w : normalize_words(line)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  TextVocab v;
  TokenId next = 1;
  for (auto& [w, c] : ranked) {
    if (static_cast<std::size_t>(next) > max_words) break;
    v.add(std::move(w), next++);
  }
  return v;
}

TokenId TextVocab::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? 0 : it->second;
}

const std::string& TextVocab::word(TokenId id) const {
  auto pos = std::lower_bound(words_.begin(), words_.end(), id,
                              [](const auto& e, TokenId v) { return e.first < v; });
  if (pos == words_.end() || pos->first != id) {
    throw RangeError(fmt::format("text id {} not in vocabulary", id));
  }
  return pos->second;
}

void TextVocab::save(std::ostream& out) const {
  for (const auto& [id, w] : words_) out << w << '\t' << id << '\n';
  if (!out) throw InputError("failed to write vocabulary");
}

void TextVocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  save(out);
}

TextVocab TextVocab::load(std::istream& in) {
  TextVocab v;
  v.ids_.clear();
  v.words_.clear();
  std::string line;
  while (text_io::next_line(in, line)) {
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("vocabulary line lacks a tab");
    const TokenId id = text_io::parse_int(std::string_view(line).substr(tab + 1));
    if (id < 0 || id >= kTextSize) throw ParseError(fmt::format("text id {} out of range", id));
    v.add(line.substr(0, tab), id);
  }
  if (v.id(kUnknown) != 0 || v.ids_.count(std::string(kUnknown)) == 0) {
    throw ParseError("vocabulary must map <unk> to 0");
  }
  for (const auto& [w, id] : kDelimiters) {
    auto it = v.ids_.find(w);
    if (it == v.ids_.end() || it->second != id) {
      throw ParseError(fmt::format("vocabulary must map {} to {}", w, id));
    }
  }
  return v;
}

TextVocab TextVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return load(in);
}

std::vector<TokenId> tokenize_text(std::string_view s, const TextVocab& vocab) {
  std::vector<TokenId> out;
  for (const std::string& w : normalize_words(s)) out.push_back(vocab.id(w));
  return out;
}

std::string detokenize_text(std::span<const TokenId> ids, const TextVocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += vocab.word(id);
  }
  return out;
}

}  // namespace ua
