#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ua/codec/codec.hpp"

namespace ua {

// Word-level vocabulary over a prefix of the text id range. Id 0 is the
// unknown word; corpus words follow by descending frequency, ties broken
// alphabetically. The six condition delimiters keep their fixed ids.
class TextVocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  TextVocab();
  // Throws ConfigError if max_words exceeds the space below the delimiters.
  static TextVocab build(std::span<const std::string> corpus, std::size_t max_words = 30000);

  // Local id of a normalized word, 0 when unknown.
  TokenId id(std::string_view word) const;
  // Throws RangeError for ids not in the table.
  const std::string& word(TokenId id) const;
  std::size_t size() const { return words_.size(); }

  // File: `word<TAB>id` per line sorted by id, delimiters included.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TextVocab load(std::istream& in);
  static TextVocab load(const std::filesystem::path& path);

 private:
  void add(std::string word, TokenId id);

  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::pair<TokenId, std::string>> words_;  // sorted by id
};

// Lowercases and splits on anything that is not an ASCII letter or digit.
std::vector<std::string> normalize_words(std::string_view s);
std::vector<TokenId> tokenize_text(std::string_view s, const TextVocab& vocab);
// Space-joined words.
std::string detokenize_text(std::span<const TokenId> ids, const TextVocab& vocab);

}  // namespace ua
