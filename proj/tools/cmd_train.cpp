#include <cmath>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "ua/causal/causal_decoder.hpp"
#include "ua/codec/params_io.hpp"
#include "ua/codec/train.hpp"
#include "ua/common/errors.hpp"
#include "ua/gen/layout.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/gen/session.hpp"
#include "ua/motion/synthetic.hpp"

namespace ua::cli {
namespace {

struct CorpusFlags {
  std::string dir;
  std::size_t synthetic = 0;
  std::uint64_t seed = 7;
};

void add_corpus_flags(CLI::App& cmd, CorpusFlags& f) {
  auto* dir = cmd.add_option("--corpus", f.dir, "directory of motion files");
  auto* syn = cmd.add_option("--synthetic", f.synthetic,
                             "use N synthetic sinusoid sequences instead of --corpus");
  dir->excludes(syn);
  cmd.add_option("--corpus-seed", f.seed, "seed of the synthetic corpus")->capture_default_str();
}

std::vector<MotionSequence> load_corpus(const CorpusFlags& f, const RunConfig& cfg) {
  if (f.synthetic > 0) {
    SinusoidCorpusOptions o;
    o.num_sequences = f.synthetic;
    o.seed = f.seed;
    return sinusoid_corpus(o);
  }
  const std::string dir = f.dir.empty() ? cfg.required("paths.corpus") : f.dir;
  return read_motion_dir(dir);
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  throw ConfigError(fmt::format("unknown optimizer '{}' (adam or sgd)", name));
}

void train_codec_command(Context& ctx, const CorpusFlags& flags) {
  const RunConfig cfg = ctx.config();
  const std::string out = cfg.required("paths.out");
  CodecConfig codec;
  codec.hidden_channels = cfg.integer("codec.hidden_channels");
  codec.kernel_size = cfg.integer("codec.kernel_size");
  codec.downsample = cfg.integer("codec.downsample");
  codec.group_norm_groups = cfg.integer("codec.group_norm_groups");
  codec.validate();
  TrainOptions opts;
  opts.optimizer = parse_optimizer(cfg.text("train.optimizer"));
  opts.learning_rate = cfg.number("train.learning_rate");
  opts.cosine_decay = cfg.flag("train.cosine_decay");
  opts.steps = cfg.integer("train.steps");
  opts.batch_size = cfg.integer("train.batch_size");
  opts.window = cfg.integer("train.window");
  opts.seed = cfg.seed("train.seed");

  const auto corpus = load_corpus(flags, cfg);
  spdlog::info("training codec on {} sequences for {} steps", corpus.size(), opts.steps);
  const TrainResult result = train_codec(corpus, codec, opts);
  save_codec(out, result.params);
  ctx.out << fmt::format("initial_loss {:.6g}\nfinal_loss {:.6g}\nfinal_rms {:.6g}\n",
                         result.initial_loss, result.final_loss, std::sqrt(result.final_loss));
}

void train_causal_command(Context& ctx, const CorpusFlags& flags) {
  const RunConfig cfg = ctx.config();
  const std::string out = cfg.required("paths.out");
  const CodecParams codec = load_codec(cfg.required("paths.codec"));
  CausalConfig causal = CausalConfig::for_codec(codec.config);
  causal.hidden = cfg.integer("causal.hidden");
  causal.kernel = cfg.integer("causal.kernel");
  causal.layers = cfg.integer("causal.layers");
  causal.chunk_size = cfg.integer("causal.chunk_size");
  causal.validate();
  CausalTrainOptions opts;
  opts.steps = cfg.integer("causal.steps");
  opts.learning_rate = cfg.number("causal.learning_rate");
  opts.seed = cfg.seed("causal.seed");

  const auto corpus = load_corpus(flags, cfg);
  spdlog::info("training causal decoder on {} sequences for {} steps", corpus.size(), opts.steps);
  const CausalTrainResult result = train_causal(codec, corpus, causal, opts);
  save_causal(out, result.params);
  ctx.out << fmt::format("final_loss {:.6g}\nfinal_rms {:.6g}\n", result.final_loss,
                         std::sqrt(result.final_loss));
}

struct GenFlags {
  std::string corpus;
  std::size_t synthetic = 0;
  std::string vocab_out;
  std::string corpus_out;
};

void train_gen_command(Context& ctx, const GenFlags& flags) {
  const RunConfig cfg = ctx.config();
  const std::string out = cfg.required("paths.out");
  std::vector<SequenceLayout> corpus;
  if (flags.synthetic > 0) {
    SyntheticTokenOptions o;
    o.num_sequences = flags.synthetic;
    o.seed = cfg.seed("gen.seed");
    SyntheticTokenCorpus syn = synthetic_token_corpus(o);
    if (!flags.vocab_out.empty()) syn.vocab.save(std::filesystem::path(flags.vocab_out));
    corpus = std::move(syn.layouts);
  } else {
    if (flags.corpus.empty()) throw InputError("train-gen needs --corpus or --synthetic");
    corpus = read_token_corpus(std::filesystem::path(flags.corpus));
  }
  if (!flags.corpus_out.empty())
    write_token_corpus(std::filesystem::path(flags.corpus_out), corpus);
  const NgramModel model =
      NgramModel::train(corpus, cfg.integer("gen.order"), cfg.number("gen.discount"));
  model.save(std::filesystem::path(out));
  ctx.out << fmt::format("sequences {}\norder {}\n", corpus.size(), model.order());
}

}  // namespace

void register_train_commands(CLI::App& app, Context& ctx) {
  auto codec_flags = std::make_shared<CorpusFlags>();
  auto* codec = app.add_subcommand("train-codec", "train the offline motion codec");
  add_config_flag(*codec, ctx);
  add_corpus_flags(*codec, *codec_flags);
  config_option(*codec, ctx, "--out", "paths.out", "output codec file");
  config_option(*codec, ctx, "--steps", "train.steps", "optimizer steps");
  config_option(*codec, ctx, "--hidden", "codec.hidden_channels", "channel width");
  config_option(*codec, ctx, "--learning-rate", "train.learning_rate", "peak learning rate");
  config_option(*codec, ctx, "--seed", "train.seed", "training seed");
  codec->callback([&ctx, codec_flags] { train_codec_command(ctx, *codec_flags); });

  auto causal_flags = std::make_shared<CorpusFlags>();
  auto* causal = app.add_subcommand("train-causal", "train the streaming causal decoder");
  add_config_flag(*causal, ctx);
  add_corpus_flags(*causal, *causal_flags);
  config_option(*causal, ctx, "--codec", "paths.codec", "trained offline codec file");
  config_option(*causal, ctx, "--out", "paths.out", "output decoder file");
  config_option(*causal, ctx, "--steps", "causal.steps", "optimizer steps");
  config_option(*causal, ctx, "--hidden", "causal.hidden", "decoder width");
  config_option(*causal, ctx, "--chunk-tokens", "causal.chunk_size", "tokens per chunk");
  config_option(*causal, ctx, "--seed", "causal.seed", "training seed");
  causal->callback([&ctx, causal_flags] { train_causal_command(ctx, *causal_flags); });

  auto gen_flags = std::make_shared<GenFlags>();
  auto* gen = app.add_subcommand("train-gen", "fit the n-gram motion-token generator");
  add_config_flag(*gen, ctx);
  auto* corpus = gen->add_option("--corpus", gen_flags->corpus, "token corpus file");
  auto* syn = gen->add_option("--synthetic", gen_flags->synthetic,
                              "use N synthetic instruction/motion sequences");
  corpus->excludes(syn);
  gen->add_option("--vocab-out", gen_flags->vocab_out, "write the synthetic text vocabulary");
  gen->add_option("--corpus-out", gen_flags->corpus_out, "write the token corpus used");
  config_option(*gen, ctx, "--out", "paths.out", "output model file");
  config_option(*gen, ctx, "--order", "gen.order", "n-gram order");
  config_option(*gen, ctx, "--discount", "gen.discount", "absolute discount");
  config_option(*gen, ctx, "--seed", "gen.seed", "synthetic corpus seed");
  gen->callback([&ctx, gen_flags] { train_gen_command(ctx, *gen_flags); });
}

}  // namespace ua::cli
