#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "ua/codec/codec.hpp"
#include "ua/common/rng.hpp"
#include "ua/gen/layout.hpp"

namespace ua {

// Next-token model over the global vocabulary. Implementations are
// read-only after construction.
class TokenModel {
 public:
  virtual ~TokenModel() = default;
  // Number of trailing context ids the model looks at.
  virtual std::size_t context_window() const = 0;
  // P(candidate | context) for every candidate, written to `out`.
  virtual void score(std::span<const TokenId> context, std::span<const TokenId> candidates,
                     std::span<double> out) const = 0;
  double probability(std::span<const TokenId> context, TokenId token) const;
  // Dense distribution over all kVocabSize ids.
  std::vector<double> distribution(std::span<const TokenId> context) const;
};

class UniformModel final : public TokenModel {
 public:
  std::size_t context_window() const override { return 0; }
  void score(std::span<const TokenId> context, std::span<const TokenId> candidates,
             std::span<double> out) const override;
};

inline constexpr int kDefaultNgramOrder = 4;
inline constexpr double kDefaultDiscount = 0.5;

// Interpolated absolute-discount backoff:
//   P_j(w | h) = max(c(h w) - D, 0) / c(h) + D * N1+(h .) / c(h) * P_{j-1}(w | h')
// where h has j-1 ids, h' drops its oldest id, P_0 is uniform over the
// vocabulary, and a context never seen in training falls through to P_{j-1}.
class NgramModel final : public TokenModel {
 public:
  struct ContextStats {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> next;
  };

  // Throws PreconditionError for order < 1 or an empty corpus, ConfigError
  // for a discount outside (0, 1].
  static NgramModel train(std::span<const std::vector<TokenId>> sequences,
                          int order = kDefaultNgramOrder, double discount = kDefaultDiscount);
  static NgramModel train(std::span<const SequenceLayout> corpus, int order = kDefaultNgramOrder,
                          double discount = kDefaultDiscount);

  int order() const { return order_; }
  double discount() const { return discount_; }
  std::size_t context_window() const override { return static_cast<std::size_t>(order_ - 1); }
  void score(std::span<const TokenId> context, std::span<const TokenId> candidates,
             std::span<double> out) const override;

  // `UANGRAM 1 <order>`, `discount <D>`, then one `<k> <ctx...> <next> <count>`
  // record per observed (context, next) pair.
  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static NgramModel load(std::istream& in);
  static NgramModel load(const std::filesystem::path& path);

 private:
  int order_ = kDefaultNgramOrder;
  double discount_ = kDefaultDiscount;
  std::map<std::vector<TokenId>, ContextStats> table_;
};

struct Sample {
  TokenId token;
  double probability;  // model probability renormalized over the candidates
};

// Samples from P(. | context)^(1/T) restricted to `candidates` (all ids when
// empty). Temperature <= 1e-6 picks the most probable id, smallest id on
// ties. Throws PreconditionError for temperature <= 0, GenerationError when
// every candidate has zero mass.
Sample next_token(const TokenModel& model, std::span<const TokenId> context, Rng& rng,
                  double temperature, std::span<const TokenId> candidates = {});

// exp of the mean negative log probability of the motion ids of each
// layout, each conditioned on everything before it. Throws
// PreconditionError when there are no motion ids.
double perplexity(const TokenModel& model, std::span<const SequenceLayout> heldout);

}  // namespace ua
