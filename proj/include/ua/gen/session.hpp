#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "ua/gen/layout.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/tokenize/text.hpp"

namespace ua {

inline constexpr std::size_t kHistoryTokens = 10;

struct SessionOptions {
  std::size_t history = kHistoryTokens;  // motion tokens carried into the next prompt
  std::size_t max_length = 250;          // motion tokens per instruction
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

// Per-client generation state. Not shared between threads.
class GenerationSession {
 public:
  explicit GenerationSession(SessionOptions options = {});

  const SessionOptions& options() const { return options_; }
  // Global motion ids retained from earlier instructions, oldest first.
  std::vector<TokenId> history() const { return {history_.begin(), history_.end()}; }
  // The prompt of the most recent generate call.
  const std::vector<TokenId>& last_prompt() const { return last_prompt_; }

  void remember(TokenId global_motion_id);
  void set_last_prompt(std::vector<TokenId> prompt) { last_prompt_ = std::move(prompt); }
  Rng& rng() { return rng_; }

 private:
  SessionOptions options_;
  Rng rng_;
  std::deque<TokenId> history_;
  std::vector<TokenId> last_prompt_;
};

// Called with each local motion id as soon as it is sampled.
using TokenSink = std::function<void(TokenId local)>;

// Prompt = retained history ++ condition segments ++ SOM. Samples motion ids
// (all other ids masked out) until EOM or the session cap, and returns the
// local motion ids. Throws PreconditionError when max_length is 0.
std::vector<TokenId> generate(const TokenModel& model, GenerationSession& session,
                              const Conditions& conditions, const TokenSink& sink = {});

// Sorted motion ids plus EOM, the candidate set used while generating.
const std::vector<TokenId>& motion_candidates();

// A learnable token corpus: short instructions over a small word set, each
// verb driving a cyclic motion-token pattern with occasional random ids.
struct SyntheticTokenOptions {
  std::size_t num_sequences = 400;
  std::size_t min_length = 20;
  std::size_t max_length = 60;
  double noise = 0.1;
  std::uint64_t seed = 11;
};

struct SyntheticTokenCorpus {
  TextVocab vocab;
  std::vector<std::string> instructions;
  std::vector<SequenceLayout> layouts;
};

SyntheticTokenCorpus synthetic_token_corpus(const SyntheticTokenOptions& options);

}  // namespace ua
