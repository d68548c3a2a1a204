#include "ua/gen/session.hpp"

#include <fmt/format.h>

#include "ua/common/errors.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {

GenerationSession::GenerationSession(SessionOptions options)
    : options_(options), rng_(make_rng(options.seed, 41)) {}

void GenerationSession::remember(TokenId global_motion_id) {
  if (options_.history == 0) return;
  history_.push_back(global_motion_id);
  while (history_.size() > options_.history) history_.pop_front();
}

const std::vector<TokenId>& motion_candidates() {
  static const std::vector<TokenId> ids = [] {
    std::vector<TokenId> v;
    v.reserve(static_cast<std::size_t>(kMotionSize) + 1);
    v.push_back(kEom);
    for (TokenId i = 0; i < kMotionSize; ++i) v.push_back(kMotionStart + i);
    return v;
  }();
  return ids;
}

std::vector<TokenId> generate(const TokenModel& model, GenerationSession& session,
                              const Conditions& conditions, const TokenSink& sink) {
  const SessionOptions& opt = session.options();
  if (opt.max_length == 0) throw PreconditionError("session max_length must be at least 1");

  SequenceLayout layout;
  if (conditions.text) {
    Conditions text_only;
    text_only.text = conditions.text;
    Rng unused = make_rng(0);
    layout = assemble(text_only, {}, 1, unused);
  }
  auto add_whole = [&](Modality m, const std::optional<std::vector<TokenId>>& local) {
    if (!local) return;
    ConditionSegment seg{m, {}};
    for (TokenId id : *local) seg.tokens.push_back(to_global(m, id));
    layout.conditions.push_back(std::move(seg));
  };
  add_whole(Modality::kMusic, conditions.music);
  add_whole(Modality::kTrajectory, conditions.trajectory);

  std::vector<TokenId> context = session.history();
  const std::vector<TokenId> prompt = layout.prompt();
  context.insert(context.end(), prompt.begin(), prompt.end());
  session.set_last_prompt(context);

  std::vector<TokenId> out;
  while (out.size() < opt.max_length) {
    const Sample s = next_token(model, context, session.rng(), opt.temperature, motion_candidates());
    if (s.token == kEom) break;
    if (!is_motion(s.token)) {
      throw GenerationError(fmt::format("sampler returned non-motion id {}", s.token));
    }
    context.push_back(s.token);
    const std::size_t window = model.context_window();
    if (context.size() > 4 * window + 64) {
      context.erase(context.begin(), context.end() - static_cast<std::ptrdiff_t>(window));
    }
    session.remember(s.token);
    out.push_back(s.token - kMotionStart);
    if (sink) sink(out.back());
  }
  return out;
}

SyntheticTokenCorpus synthetic_token_corpus(const SyntheticTokenOptions& options) {
  static const char* kVerbs[] = {"walk", "run", "jump", "wave", "turn", "kick", "dance", "crouch"};
  static const char* kModifiers[] = {"slowly", "quickly", "forward", "backward", "left", "right"};
  constexpr std::size_t kCycle = 6;
  Rng rng = make_rng(options.seed, 43);
  auto pick = [&](std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
  };

  SyntheticTokenCorpus corpus;
  std::vector<std::pair<std::size_t, std::size_t>> choice;
  for (std::size_t s = 0; s < options.num_sequences; ++s) {
    const std::size_t v = pick(std::size(kVerbs));
    const std::size_t m = pick(std::size(kModifiers));
    corpus.instructions.push_back(fmt::format("{} {}", kVerbs[v], kModifiers[m]));
    choice.emplace_back(v, m);
  }
  corpus.vocab = TextVocab::build(corpus.instructions);

  const std::size_t span = options.max_length - std::min(options.max_length, options.min_length) + 1;
  for (std::size_t s = 0; s < options.num_sequences; ++s) {
    const auto [v, m] = choice[s];
    // Each verb owns a block of motion ids; the modifier sets the phase step.
    const TokenId base = static_cast<TokenId>(v * 1000 + m * 50);
    const std::size_t step = 1 + m % 3;
    const std::size_t length = options.min_length + pick(span);
    std::vector<TokenId> motion;
    std::size_t phase = pick(kCycle);
    for (std::size_t t = 0; t < length; ++t) {
      if (uniform01(rng) < options.noise) {
        motion.push_back(static_cast<TokenId>(pick(static_cast<std::size_t>(kMotionSize))));
      } else {
        motion.push_back(base + static_cast<TokenId>(phase));
      }
      phase = (phase + step) % kCycle;
    }
    Conditions cond;
    cond.text = tokenize_text(corpus.instructions[s], corpus.vocab);
    Rng unused = make_rng(0);
    corpus.layouts.push_back(assemble(cond, motion, 1, unused));
  }
  return corpus;
}

}  // namespace ua
