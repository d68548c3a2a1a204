#include <csignal>
#include <chrono>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "context.hpp"
#include "ua/causal/causal_decoder.hpp"
#include "ua/codec/params_io.hpp"
#include "ua/common/errors.hpp"
#include "ua/motion/kinematics.hpp"
#include "ua/motion/motion_io.hpp"
#include "ua/stream/client.hpp"
#include "ua/stream/pipeline.hpp"
#include "ua/stream/server.hpp"

namespace ua::cli {
namespace {

struct ServeFlags {
  std::string music_codec;
  double duration_s = 0.0;
};

// Blocks SIGINT and SIGTERM for this thread and the threads it starts, and
// restores the previous mask on exit.
class SignalBlock {
 public:
  SignalBlock() {
    sigemptyset(&set_);
    sigaddset(&set_, SIGINT);
    sigaddset(&set_, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set_, &old_);
  }
  ~SignalBlock() { pthread_sigmask(SIG_SETMASK, &old_, nullptr); }

  // Waits up to `ms` for a blocked signal. Returns the signal or 0.
  int wait(long ms) const {
    timespec ts{ms / 1000, (ms % 1000) * 1000000};
    const int sig = sigtimedwait(&set_, nullptr, &ts);
    return sig > 0 ? sig : 0;
  }

 private:
  sigset_t set_{};
  sigset_t old_{};
};

void serve_command(Context& ctx, const ServeFlags& f) {
  const RunConfig cfg = ctx.config();
  auto res = std::make_shared<StreamResources>();
  res->model = std::make_shared<NgramModel>(
      NgramModel::load(std::filesystem::path(cfg.required("paths.model"))));
  CausalDecoderParams decoder = load_causal(std::filesystem::path(cfg.required("paths.codec")));
  decoder.config.chunk_size = cfg.integer("causal.chunk_size");
  decoder.config.validate();
  res->decoder = std::make_shared<CausalDecoderParams>(std::move(decoder));
  res->vocab = std::make_shared<TextVocab>(
      TextVocab::load(std::filesystem::path(cfg.required("paths.vocab"))));
  const std::string music = f.music_codec.empty() && cfg.has("paths.music_codec")
                                ? cfg.text("paths.music_codec")
                                : f.music_codec;
  if (!music.empty())
    res->music_codec = std::make_shared<CodecParams>(load_codec(std::filesystem::path(music)));
  res->session.history = cfg.integer("gen.history");
  res->session.max_length = cfg.integer("gen.max_length");
  res->session.temperature = cfg.number("gen.temperature");
  res->session.seed = cfg.seed("gen.seed");
  res->queue_chunks = cfg.integer("stream.queue_chunks");

  ServerOptions opts;
  opts.bind = parse_endpoint(cfg.text("stream.bind"));
  const std::string console = cfg.text("stream.console");
  if (!console.empty()) opts.console_dir = console;

  SignalBlock signals;
  StreamServer server(res, opts);
  server.start();
  ctx.out << fmt::format("listening on {}:{}", opts.bind.host, server.port()) << std::endl;

  const auto start = std::chrono::steady_clock::now();
  for (;;) {
    if (const int sig = signals.wait(200)) {
      spdlog::info("received signal {}, shutting down", sig);
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (f.duration_s > 0.0 && elapsed >= f.duration_s) break;
  }
  server.stop();
}

struct ClientFlags {
  std::string connect = "127.0.0.1:8765";
  std::optional<std::string> text;
  std::string traj;
  std::string music;
  std::string out;
  bool timing = false;
  double wait_s = 60.0;
};

void client_command(Context& ctx, const ClientFlags& f) {
  Instruction instruction;
  if (f.text) instruction.text = *f.text;
  if (!f.traj.empty()) instruction.trajectory = read_text_file(f.traj);
  if (!f.music.empty()) instruction.music = read_text_file(f.music);
  if (!instruction.text && !instruction.trajectory && !instruction.music)
    throw InputError("client needs --text, --traj or --music");

  ClientOptions opts;
  opts.server = parse_endpoint(f.connect);
  StreamClient client(opts);
  client.connect();

  std::uint64_t seq = 0;
  if (f.timing) {
    const TimingBreakdown t = measure_latency(client, instruction, KinematicModel::g1(), &seq);
    ctx.out << fmt::format(
        "motion_generation_ms {:.3f}\ntoken_decode_ms {:.3f}\nmotion_track_ms {:.3f}\n"
        "data_transmission_ms {:.3f}\nmodel_latency_ms {:.3f}\ntotal_delay_ms {:.3f}\n",
        t.motion_generation_ms, t.token_decode_ms, t.motion_track_ms, t.data_transmission_ms,
        t.model_latency_ms, t.total_delay_ms);
  } else {
    seq = client.instruct(instruction);
  }
  if (!client.wait_complete(seq, f.wait_s * 1000.0))
    throw ProtocolError(fmt::format("instruction {} not complete after {} s", seq, f.wait_s));

  std::vector<MotionFrame> frames;
  double fps = kCanonicalFps;
  for (const ReceivedMessage& r : client.log()) {
    const auto* chunk = std::get_if<MotionChunk>(&r.message.payload);
    if (!chunk || chunk->instruction_seq != seq) continue;
    fps = chunk->fps;
    for (const WireFrame& w : chunk->frames) frames.push_back(from_wire(w));
  }
  client.close();
  ctx.out << fmt::format("session {}\nframes {}\n", client.session(), frames.size());
  if (f.out.empty()) return;
  if (frames.empty()) throw GenerationError("server sent no frames; nothing to write");
  write_motion(std::filesystem::path(f.out), MotionSequence(fps, std::move(frames)));
}

}  // namespace

void register_stream_commands(CLI::App& app, Context& ctx) {
  auto sv = std::make_shared<ServeFlags>();
  auto* serve = app.add_subcommand("serve", "stream generated motion over WebSocket");
  add_config_flag(*serve, ctx);
  config_option(*serve, ctx, "--bind", "stream.bind", "listen address host:port");
  config_option(*serve, ctx, "--codec", "paths.codec", "trained causal decoder file");
  config_option(*serve, ctx, "--model", "paths.model", "n-gram model file");
  config_option(*serve, ctx, "--vocab", "paths.vocab", "text vocabulary file");
  config_option(*serve, ctx, "--chunk-tokens", "causal.chunk_size", "tokens per streamed chunk");
  config_option(*serve, ctx, "--console", "stream.console", "directory of console assets");
  config_option(*serve, ctx, "--seed", "gen.seed", "sampling seed");
  serve->add_option("--music-codec", sv->music_codec, "music codec for music instructions");
  serve->add_option("--duration", sv->duration_s, "stop after this many seconds (0 runs until signalled)");
  serve->callback([&ctx, sv] { serve_command(ctx, *sv); });

  auto cl = std::make_shared<ClientFlags>();
  auto* client = app.add_subcommand("client", "send one instruction and collect the motion");
  client->add_option("--connect", cl->connect, "server address host:port")->capture_default_str();
  auto* text = client->add_option("--text", cl->text, "text instruction");
  auto* traj = client->add_option("--traj", cl->traj, "trajectory file");
  auto* music = client->add_option("--music", cl->music, "music feature file");
  text->excludes(traj)->excludes(music);
  traj->excludes(music);
  client->add_option("--out", cl->out, "write the received motion");
  client->add_flag("--timing", cl->timing, "print the latency breakdown of the first chunk");
  client->add_option("--wait", cl->wait_s, "seconds to wait for completion")->capture_default_str();
  client->callback([&ctx, cl] { client_command(ctx, *cl); });
}

}  // namespace ua::cli
