#include <memory>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "ua/augment/gait.hpp"
#include "ua/augment/segment.hpp"
#include "ua/augment/synthesize.hpp"
#include "ua/causal/causal_decoder.hpp"
#include "ua/codec/params_io.hpp"
#include "ua/common/errors.hpp"
#include "ua/common/rng.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/gen/session.hpp"
#include "ua/motion/motion_io.hpp"
#include "ua/motion/synthetic.hpp"
#include "ua/robust/noise.hpp"
#include "ua/robust/sweep.hpp"
#include "ua/stream/pipeline.hpp"
#include "ua/tokenize/music.hpp"
#include "ua/tokenize/text.hpp"
#include "ua/tokenize/trajectory.hpp"

namespace ua::cli {
namespace {

struct ConditionFlags {
  std::optional<std::string> text;
  std::string traj;
  std::string music;
  std::string vocab;
  std::string music_codec;
};

Conditions load_conditions(const ConditionFlags& f) {
  Conditions c;
  if (f.text) {
    if (f.vocab.empty()) throw InputError("--text needs --vocab");
    c.text = tokenize_text(*f.text, TextVocab::load(std::filesystem::path(f.vocab)));
  }
  if (!f.traj.empty()) {
    const Trajectory t = read_trajectory(std::filesystem::path(f.traj));
    c.trajectory = tokenize_trajectory(t.roots, t.fps);
  }
  if (!f.music.empty()) {
    if (f.music_codec.empty()) throw InputError("--music needs --music-codec");
    c.music = tokenize_music(read_music(std::filesystem::path(f.music)),
                             load_codec(std::filesystem::path(f.music_codec)));
  }
  return c;
}

struct TokenizeFlags {
  ConditionFlags cond;
  std::string motion;
  std::string codec;
};

void tokenize_command(Context& ctx, const TokenizeFlags& f) {
  std::vector<TokenId> ids;
  if (!f.motion.empty()) {
    if (f.codec.empty()) throw InputError("--motion needs --codec");
    const CodecParams codec = load_codec(std::filesystem::path(f.codec));
    const MotionSequence seq = read_motion(std::filesystem::path(f.motion));
    ids = encode(dof_matrix(resample(seq, kCanonicalFps)), codec);
  } else if (f.cond.text) {
    ids = *load_conditions(f.cond).text;
  } else if (!f.cond.traj.empty()) {
    ids = *load_conditions(f.cond).trajectory;
  } else if (!f.cond.music.empty()) {
    ConditionFlags c = f.cond;
    c.music_codec = f.codec;
    ids = *load_conditions(c).music;
  } else {
    throw InputError("tokenize needs one of --text, --traj, --music or --motion");
  }
  ctx.out << fmt::format("{}\n", fmt::join(ids, " "));
}

struct GenerateFlags {
  ConditionFlags cond;
  std::string model;
  std::string codec;
  std::string decoder;
  std::string out;
  std::string tokens_out;
};

void generate_command(Context& ctx, const GenerateFlags& f) {
  const RunConfig cfg = ctx.config();
  const std::string model_path = f.model.empty() ? cfg.required("paths.model") : f.model;
  ConditionFlags cond = f.cond;
  if (cond.vocab.empty() && cfg.has("paths.vocab")) cond.vocab = cfg.text("paths.vocab");
  if (cond.music_codec.empty() && cfg.has("paths.music_codec"))
    cond.music_codec = cfg.text("paths.music_codec");
  const NgramModel model = NgramModel::load(std::filesystem::path(model_path));
  SessionOptions so;
  so.history = cfg.integer("gen.history");
  so.max_length = cfg.integer("gen.max_length");
  so.temperature = cfg.number("gen.temperature");
  so.seed = cfg.seed("gen.seed");
  GenerationSession session(so);
  const std::vector<TokenId> tokens = generate(model, session, load_conditions(cond));
  ctx.out << fmt::format("{}\n", fmt::join(tokens, " "));
  if (!f.tokens_out.empty()) write_text_file(f.tokens_out, fmt::format("{}\n", fmt::join(tokens, " ")));
  if (f.out.empty()) return;
  if (tokens.empty()) throw GenerationError("no motion tokens generated; nothing to write");
  nn::Mat dofs;
  if (!f.decoder.empty()) {
    dofs = decode_causal(tokens, load_causal(std::filesystem::path(f.decoder)));
  } else {
    const std::string codec = f.codec.empty() ? cfg.required("paths.codec") : f.codec;
    dofs = decode(tokens, load_codec(std::filesystem::path(codec)));
  }
  const RootState root{Vec3(0.0, 0.0, kStreamRootHeight), Quat::Identity()};
  write_motion(std::filesystem::path(f.out),
               from_dof_matrix(dofs, kCanonicalFps, std::span(&root, 1)));
}

struct AugmentFlags {
  std::string library;
  double minutes = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string qc_report;
};

void augment_command(Context& ctx, const AugmentFlags& f) {
  const auto sequences = read_motion_dir(f.library);
  const auto library = build_library(sequences);
  if (library.size() < 2)
    throw InputError(fmt::format("library {} yields {} clips; need at least 2", f.library,
                                 library.size()));
  SynthesisOptions o;
  o.duration_s = f.minutes * 60.0;
  o.seed = f.seed;
  const SynthesisResult result = synthesize(library, o);
  write_motion(std::filesystem::path(f.out), result.motion);
  if (!f.qc_report.empty()) {
    std::ostringstream report;
    write_qc_report(report, result.qc);
    write_text_file(f.qc_report, report.str());
  }
  ctx.out << fmt::format("frames {}\nclips {}\ntransitions {}\nviolations {}\n",
                         result.motion.size(), library.size(), result.qc.transitions.size(),
                         result.qc.violations());
}

struct SynthFlags {
  double gait_s = 0.0;
  std::size_t sinusoid = 0;
  std::size_t frames = 96;
  std::uint64_t seed = 0;
  std::string out;
};

void synth_command(Context& ctx, const SynthFlags& f) {
  const std::filesystem::path out(f.out);
  if (f.gait_s > 0.0) {
    GaitOptions o;
    o.duration_s = f.gait_s;
    o.seed = f.seed;
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    write_motion(out, synthetic_gait(o));
    ctx.out << fmt::format("wrote {}\n", out.string());
    return;
  }
  if (f.sinusoid == 0) throw InputError("synth needs --gait or --sinusoid");
  SinusoidCorpusOptions o;
  o.num_sequences = f.sinusoid;
  o.frames = f.frames;
  o.seed = f.seed;
  const auto corpus = sinusoid_corpus(o);
  std::filesystem::create_directories(out);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    write_motion(out / fmt::format("seq_{:05}{}", i, kMotionExt), corpus[i]);
  ctx.out << fmt::format("wrote {} sequences to {}\n", corpus.size(), out.string());
}

struct CorruptFlags {
  std::string in;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

void corrupt_command(Context&, const CorruptFlags& f) {
  NoiseConfig noise;
  noise.scale = f.scale;
  noise.validate();
  Rng rng = make_rng(f.seed);
  write_motion(std::filesystem::path(f.out),
               corrupt(read_motion(std::filesystem::path(f.in)), noise, rng));
}

struct SweepFlags {
  std::string corpus;
  std::string codec;
  std::string scales = "1,2,4,8";
  std::string report;
  std::uint64_t seed = 0;
  bool track = false;
};

void sweep_command(Context& ctx, const SweepFlags& f) {
  const auto corpus = read_motion_dir(f.corpus);
  const CodecParams codec = load_codec(std::filesystem::path(f.codec));
  SweepOptions o;
  o.scales = parse_number_list(f.scales);
  o.seed = f.seed;
  if (f.track) o.tracker = PdConfig{};
  const SweepResult result = sweep(corpus, codec, o);
  std::ostringstream report;
  write_sweep_report(report, result);
  if (f.report.empty()) {
    ctx.out << report.str();
  } else {
    write_text_file(f.report, report.str());
  }
}

void add_condition_flags(CLI::App& cmd, ConditionFlags& f) {
  cmd.add_option("--text", f.text, "text instruction");
  cmd.add_option("--traj", f.traj, "trajectory file");
  cmd.add_option("--music", f.music, "music feature file");
  cmd.add_option("--vocab", f.vocab, "text vocabulary file");
}

}  // namespace

void register_data_commands(CLI::App& app, Context& ctx) {
  auto tok = std::make_shared<TokenizeFlags>();
  auto* tokenize = app.add_subcommand("tokenize", "print the local token ids of one input");
  add_condition_flags(*tokenize, tok->cond);
  tokenize->add_option("--motion", tok->motion, "motion file");
  tokenize->add_option("--codec", tok->codec, "codec for --motion or --music");
  tokenize->callback([&ctx, tok] { tokenize_command(ctx, *tok); });

  auto gen = std::make_shared<GenerateFlags>();
  auto* generate = app.add_subcommand("generate", "sample motion tokens for one instruction");
  add_config_flag(*generate, ctx);
  add_condition_flags(*generate, gen->cond);
  generate->add_option("--music-codec", gen->cond.music_codec, "music codec file");
  generate->add_option("--model", gen->model, "n-gram model file");
  generate->add_option("--codec", gen->codec, "offline codec used to decode --out");
  generate->add_option("--decoder", gen->decoder, "causal decoder used to decode --out instead");
  generate->add_option("--out", gen->out, "write the decoded motion");
  generate->add_option("--tokens-out", gen->tokens_out, "write the sampled tokens");
  config_option(*generate, ctx, "--seed", "gen.seed", "sampling seed");
  config_option(*generate, ctx, "--temperature", "gen.temperature", "sampling temperature");
  config_option(*generate, ctx, "--max-length", "gen.max_length", "motion token cap");
  generate->callback([&ctx, gen] { generate_command(ctx, *gen); });

  auto aug = std::make_shared<AugmentFlags>();
  auto* augment = app.add_subcommand("augment", "synthesize long locomotion by motion matching");
  augment->add_option("--library", aug->library, "directory of motion files")->required();
  augment->add_option("--minutes", aug->minutes, "output duration")->capture_default_str();
  augment->add_option("--seed", aug->seed, "sampling seed")->capture_default_str();
  augment->add_option("--out", aug->out, "output motion file")->required();
  augment->add_option("--qc-report", aug->qc_report, "per-transition QC report");
  augment->callback([&ctx, aug] { augment_command(ctx, *aug); });

  auto syn = std::make_shared<SynthFlags>();
  auto* synth = app.add_subcommand("synth", "write synthetic motion data");
  auto* gait = synth->add_option("--gait", syn->gait_s, "one walking sequence of this many seconds");
  auto* sin = synth->add_option("--sinusoid", syn->sinusoid, "N sinusoid sequences into a directory");
  gait->excludes(sin);
  synth->add_option("--frames", syn->frames, "frames per sinusoid sequence")->capture_default_str();
  synth->add_option("--seed", syn->seed, "generator seed")->capture_default_str();
  synth->add_option("--out", syn->out, "output file or directory")->required();
  synth->callback([&ctx, syn] { synth_command(ctx, *syn); });

  auto cor = std::make_shared<CorruptFlags>();
  auto* corrupt_cmd = app.add_subcommand("corrupt", "add structured noise to a motion file");
  corrupt_cmd->add_option("--in", cor->in, "input motion file")->required();
  corrupt_cmd->add_option("--scale", cor->scale, "noise scale")->capture_default_str();
  corrupt_cmd->add_option("--seed", cor->seed, "noise seed")->capture_default_str();
  corrupt_cmd->add_option("--out", cor->out, "output motion file")->required();
  corrupt_cmd->callback([&ctx, cor] { corrupt_command(ctx, *cor); });

  auto sw = std::make_shared<SweepFlags>();
  auto* sweep_cmd = app.add_subcommand("sweep", "codec denoising across noise scales");
  sweep_cmd->add_option("--corpus", sw->corpus, "directory of clean motion files")->required();
  sweep_cmd->add_option("--codec", sw->codec, "trained codec file")->required();
  sweep_cmd->add_option("--scales", sw->scales, "comma-separated noise scales")
      ->capture_default_str();
  sweep_cmd->add_option("--report", sw->report, "report path (stdout when omitted)");
  sweep_cmd->add_option("--seed", sw->seed, "noise seed")->capture_default_str();
  sweep_cmd->add_flag("--track", sw->track, "also PD-track the roundtrip outputs");
  sweep_cmd->callback([&ctx, sw] { sweep_command(ctx, *sw); });
}

}  // namespace ua::cli
