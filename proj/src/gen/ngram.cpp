#include "ua/gen/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/motion/motion_io.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {

namespace {

std::vector<TokenId> all_ids() {
  std::vector<TokenId> ids(static_cast<std::size_t>(kVocabSize));
  std::iota(ids.begin(), ids.end(), TokenId{0});
  return ids;
}

// Maps a token id to its position in a candidate list.
class CandidateIndex {
 public:
  explicit CandidateIndex(std::span<const TokenId> candidates)
      : candidates_(candidates), sorted_(std::is_sorted(candidates.begin(), candidates.end())) {
    if (!sorted_) {
      for (std::size_t i = 0; i < candidates.size(); ++i) map_.emplace(candidates[i], i);
    }
  }
  std::ptrdiff_t find(TokenId id) const {
    if (sorted_) {
      auto it = std::lower_bound(candidates_.begin(), candidates_.end(), id);
      return it != candidates_.end() && *it == id ? it - candidates_.begin() : -1;
    }
    auto it = map_.find(id);
    return it == map_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }

 private:
  std::span<const TokenId> candidates_;
  bool sorted_;
  std::unordered_map<TokenId, std::size_t> map_;
};

}  // namespace

double TokenModel::probability(std::span<const TokenId> context, TokenId token) const {
  double p = 0.0;
  score(context, std::span<const TokenId>(&token, 1), std::span<double>(&p, 1));
  return p;
}

std::vector<double> TokenModel::distribution(std::span<const TokenId> context) const {
  const std::vector<TokenId> ids = all_ids();
  std::vector<double> p(ids.size());
  score(context, ids, p);
  return p;
}

void UniformModel::score(std::span<const TokenId>, std::span<const TokenId> candidates,
                         std::span<double> out) const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out[i] = candidates[i] >= 0 && candidates[i] < kVocabSize ? 1.0 / static_cast<double>(kVocabSize) : 0.0;
  }
}

NgramModel NgramModel::train(std::span<const std::vector<TokenId>> sequences, int order,
                             double discount) {
  if (order < 1) throw PreconditionError("n-gram order must be at least 1");
  if (sequences.empty()) throw PreconditionError("n-gram corpus is empty");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must be in (0, 1]");
  NgramModel m;
  m.order_ = order;
  m.discount_ = discount;
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] < 0 || seq[i] >= kVocabSize) throw RangeError(fmt::format("id {} outside vocabulary", seq[i]));
      for (int j = 1; j <= order; ++j) {
        const std::size_t k = static_cast<std::size_t>(j - 1);
        if (k > i) break;
        std::vector<TokenId> ctx(seq.begin() + static_cast<std::ptrdiff_t>(i - k),
                                 seq.begin() + static_cast<std::ptrdiff_t>(i));
        ContextStats& stats = m.table_[std::move(ctx)];
        ++stats.total;
        ++stats.next[seq[i]];
      }
    }
  }
  return m;
}

NgramModel NgramModel::train(std::span<const SequenceLayout> corpus, int order, double discount) {
  std::vector<std::vector<TokenId>> flat;
  flat.reserve(corpus.size());
  for (const SequenceLayout& layout : corpus) flat.push_back(layout.flatten());
  return train(std::span<const std::vector<TokenId>>(flat), order, discount);
}

void NgramModel::score(std::span<const TokenId> context, std::span<const TokenId> candidates,
                       std::span<double> out) const {
  const double uniform = 1.0 / static_cast<double>(kVocabSize);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out[i] = candidates[i] >= 0 && candidates[i] < kVocabSize ? uniform : 0.0;
  }
  const CandidateIndex index(candidates);
  std::vector<TokenId> ctx;
  for (int j = 1; j <= order_; ++j) {
    const std::size_t k = static_cast<std::size_t>(j - 1);
    if (k > context.size()) break;
    ctx.assign(context.end() - static_cast<std::ptrdiff_t>(k), context.end());
    auto it = table_.find(ctx);
    if (it == table_.end()) continue;
    const ContextStats& stats = it->second;
    const double total = static_cast<double>(stats.total);
    const double lambda = discount_ * static_cast<double>(stats.next.size()) / total;
    for (std::size_t i = 0; i < candidates.size(); ++i) out[i] *= lambda;
    for (const auto& [w, c] : stats.next) {
      const std::ptrdiff_t pos = index.find(w);
      if (pos >= 0) out[static_cast<std::size_t>(pos)] += std::max(static_cast<double>(c) - discount_, 0.0) / total;
    }
  }
}

void NgramModel::save(std::ostream& out) const {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "UANGRAM 1 {}\ndiscount {}\n", order_, discount_);
  for (const auto& [ctx, stats] : table_) {
    for (const auto& [w, c] : stats.next) {
      fmt::format_to(std::back_inserter(buf), "{}", ctx.size());
      for (TokenId id : ctx) fmt::format_to(std::back_inserter(buf), " {}", id);
      fmt::format_to(std::back_inserter(buf), " {} {}\n", w, c);
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw InputError("failed to write n-gram model");
}

void NgramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  save(out);
}

NgramModel NgramModel::load(std::istream& in) {
  auto header = text_io::expect_header(in, "UANGRAM", "1", 1);
  NgramModel m;
  m.order_ = static_cast<int>(text_io::parse_int(header[0]));
  if (m.order_ < 1) throw ParseError("n-gram order must be at least 1");
  std::string line;
  if (!text_io::next_line(in, line)) throw ParseError("n-gram file lacks discount");
  auto d = text_io::split_ws(line);
  if (d.size() != 2 || d[0] != "discount") throw ParseError("malformed discount line");
  m.discount_ = text_io::parse_double(d[1]);
  if (!(m.discount_ > 0.0 && m.discount_ <= 1.0)) throw ParseError("discount must be in (0, 1]");
  while (text_io::next_line(in, line)) {
    auto tok = text_io::split_ws(line);
    const long long k = tok.empty() ? -1 : text_io::parse_int(tok[0]);
    if (k < 0 || k >= m.order_ || tok.size() != static_cast<std::size_t>(k) + 3) {
      throw ParseError("malformed n-gram record");
    }
    std::vector<TokenId> ctx;
    for (long long i = 0; i < k; ++i) ctx.push_back(text_io::parse_int(tok[static_cast<std::size_t>(i + 1)]));
    const TokenId w = text_io::parse_int(tok[static_cast<std::size_t>(k + 1)]);
    const long long c = text_io::parse_int(tok[static_cast<std::size_t>(k + 2)]);
    if (c <= 0 || w < 0 || w >= kVocabSize) throw ParseError("n-gram record out of range");
    ContextStats& stats = m.table_[std::move(ctx)];
    stats.total += static_cast<std::uint64_t>(c);
    if (!stats.next.emplace(w, static_cast<std::uint64_t>(c)).second) {
      throw ParseError("duplicate n-gram record");
    }
  }
  return m;
}

NgramModel NgramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open {}", path.string()));
  return load(in);
}

Sample next_token(const TokenModel& model, std::span<const TokenId> context, Rng& rng,
                  double temperature, std::span<const TokenId> candidates) {
  if (!(temperature > 0.0)) throw PreconditionError("temperature must be positive");
  std::vector<TokenId> every;
  if (candidates.empty()) {
    every = all_ids();
    candidates = every;
  }
  const std::size_t window = model.context_window();
  if (context.size() > window) context = context.subspan(context.size() - window);
  std::vector<double> p(candidates.size());
  model.score(context, candidates, p);
  const double mass = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(mass > 0.0)) throw GenerationError("model assigns no mass to any allowed token");

  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best] || (p[i] == p[best] && candidates[i] < candidates[best])) best = i;
  }
  if (temperature <= 1e-6) return {candidates[best], p[best] / mass};

  const double log_max = std::log(p[best]);
  std::vector<double> w(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    w[i] = p[i] > 0.0 ? std::exp((std::log(p[i]) - log_max) / temperature) : 0.0;
    total += w[i];
  }
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t pick = best;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    pick = i;
    if (u < acc) break;
  }
  return {candidates[pick], p[pick] / mass};
}

double perplexity(const TokenModel& model, std::span<const SequenceLayout> heldout) {
  const std::size_t window = model.context_window();
  double nll = 0.0;
  std::size_t count = 0;
  for (const SequenceLayout& layout : heldout) {
    const std::vector<TokenId> flat = layout.flatten();
    const std::size_t first = flat.size() - 1 - layout.motion.size();
    for (std::size_t i = first; i + 1 < flat.size(); ++i) {
      const std::size_t begin = i > window ? i - window : 0;
      const std::span<const TokenId> ctx(flat.data() + begin, i - begin);
      nll -= std::log(model.probability(ctx, flat[i]));
      ++count;
    }
  }
  if (count == 0) throw PreconditionError("held-out set has no motion tokens");
  return std::exp(nll / static_cast<double>(count));
}

}  // namespace ua
