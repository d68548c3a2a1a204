#include "ua/stream/pipeline.hpp"

#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ua/common/errors.hpp"
#include "ua/tokenize/music.hpp"
#include "ua/tokenize/trajectory.hpp"

namespace ua {
namespace {

struct Cancelled {};

std::string next_session_id() {
  static std::atomic<std::uint64_t> counter{0};
  return fmt::format("session-{}", ++counter);
}

}  // namespace

void StreamResources::validate() const {
  if (!model) throw ConfigError("stream resources need a token model");
  if (!decoder) throw ConfigError("stream resources need a causal decoder");
  if (!decoder->trained) throw ConfigError("causal decoder is untrained");
  if (!vocab) throw ConfigError("stream resources need a text vocabulary");
  if (queue_chunks == 0) throw ConfigError("queue_chunks must be positive");
}

Conditions instruction_conditions(const Instruction& instruction, const StreamResources& res) {
  Conditions out;
  if (instruction.text) out.text = tokenize_text(*instruction.text, *res.vocab);
  try {
    if (instruction.trajectory) {
      std::istringstream in(*instruction.trajectory);
      const Trajectory t = read_trajectory(in);
      out.trajectory = tokenize_trajectory(t.roots, t.fps);
    }
    if (instruction.music) {
      if (!res.music_codec) throw ConfigError("music instructions need a music codec");
      std::istringstream in(*instruction.music);
      out.music = tokenize_music(read_music(in), *res.music_codec);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(fmt::format("bad instruction body: {}", e.what()));
  }
  return out;
}

struct ServerConnection::Generation {
  explicit Generation(std::size_t capacity) : queue(capacity) {}
  std::atomic<bool> cancel{false};
  bool aborted = false;  // guarded by out_mutex_
  SpscQueue<Outgoing> queue;
  std::thread producer;
  std::thread transmitter;
};

ServerConnection::ServerConnection(std::shared_ptr<const StreamResources> resources, Send send)
    : res_(std::move(resources)),
      send_(std::move(send)),
      session_((res_->validate(), res_->session)),
      stream_(*res_->decoder) {
  worker_ = std::thread([this] { worker_loop(); });
}

ServerConnection::~ServerConnection() {
  {
    std::lock_guard lock(inbox_mutex_);
    closing_ = true;
  }
  inbox_cv_.notify_all();
  worker_.join();
}

std::string ServerConnection::session_id() const {
  std::lock_guard lock(state_mutex_);
  return session_id_;
}

SessionStatus ServerConnection::status() const {
  std::lock_guard lock(state_mutex_);
  return status_;
}

void ServerConnection::send_payload(Payload payload) {
  std::lock_guard lock(out_mutex_);
  WireMessage m{++out_seq_, session_id(), steady_now_ms(), std::move(payload)};
  send_(encode_message(m));
}

void ServerConnection::send_error(std::string reason, std::optional<std::uint64_t> ref_seq) {
  spdlog::debug("stream error reply: {}", reason);
  send_payload(ErrorReply{std::move(reason), ref_seq});
}

void ServerConnection::on_text(std::string_view raw) {
  const double received = steady_now_ms();
  WireMessage m;
  try {
    m = decode_message(raw);
  } catch (const ProtocolError& e) {
    send_error(e.what(), std::nullopt);
    return;
  }
  if (have_in_seq_ && m.seq <= in_seq_) {
    send_error(fmt::format("seq {} does not follow {}", m.seq, in_seq_), m.seq);
    return;
  }
  have_in_seq_ = true;
  in_seq_ = m.seq;

  if (auto* probe = std::get_if<LatencyProbe>(&m.payload)) {
    LatencyProbe reply = *probe;
    reply.server_time_ms = steady_now_ms();
    send_payload(reply);
    return;
  }
  const std::string current = session_id();
  if (auto* c = std::get_if<Control>(&m.payload); c && c->action == ControlAction::kStart) {
    if (!m.session.empty() && m.session != current) {
      send_error(fmt::format("unknown session '{}'", m.session), m.seq);
      return;
    }
    if (current.empty()) {
      std::lock_guard lock(state_mutex_);
      session_id_ = next_session_id();
    }
    send_payload(Ack{m.seq, std::nullopt});
    return;
  }
  if (current.empty() || m.session != current) {
    send_error(fmt::format("unknown session '{}'", m.session), m.seq);
    return;
  }
  if (std::holds_alternative<Instruction>(m.payload) ||
      std::holds_alternative<Control>(m.payload)) {
    {
      std::lock_guard lock(inbox_mutex_);
      inbox_.push_back({std::move(m), received});
    }
    inbox_cv_.notify_one();
    return;
  }
  send_error(fmt::format("clients may not send {}", message_type_name(m.type())), m.seq);
}

void ServerConnection::worker_loop() {
  for (;;) {
    Inbound in;
    {
      std::unique_lock lock(inbox_mutex_);
      inbox_cv_.wait(lock, [&] { return closing_ || !inbox_.empty(); });
      if (closing_) break;
      in = std::move(inbox_.front());
      inbox_.pop_front();
    }
    handle(in);
  }
  cancel_generation();
}

void ServerConnection::handle(const Inbound& in) {
  const WireMessage& m = in.message;
  if (const auto* instr = std::get_if<Instruction>(&m.payload)) {
    Conditions cond;
    try {
      cond = instruction_conditions(*instr, *res_);
    } catch (const Error& e) {
      send_error(e.what(), m.seq);
      return;
    }
    cancel_generation();
    send_payload(Ack{m.seq, std::nullopt});
    start_generation(in, std::move(cond));
    return;
  }
  const auto& c = std::get<Control>(m.payload);
  if (c.action == ControlAction::kStop) {
    cancel_generation();
    send_payload(Ack{m.seq, std::nullopt});
  } else {
    send_payload(Ack{m.seq, status()});
  }
}

void ServerConnection::start_generation(const Inbound& in, Conditions conditions) {
  active_ = std::make_unique<Generation>(res_->queue_chunks);
  Generation& g = *active_;
  {
    std::lock_guard lock(state_mutex_);
    status_.active = true;
  }
  const std::uint64_t seq = in.message.seq;
  const double received = in.received_ms;
  g.transmitter = std::thread([this, &g] { transmit_from(g); });
  g.producer = std::thread([this, &g, seq, received, cond = std::move(conditions)]() mutable {
    generate_into(g, std::move(cond), seq, received);
  });
}

void ServerConnection::cancel_generation() {
  if (!active_) return;
  Generation& g = *active_;
  g.cancel = true;
  {
    std::lock_guard lock(out_mutex_);
    g.aborted = true;
  }
  g.queue.abort();
  g.producer.join();
  g.transmitter.join();
  active_.reset();
  std::lock_guard lock(state_mutex_);
  status_.active = false;
}

void ServerConnection::generate_into(Generation& g, Conditions conditions,
                                     std::uint64_t instruction_seq, double received_ms) {
  const CausalDecoderParams& dec = *res_->decoder;
  std::vector<TokenId> pending;
  bool first = true;
  bool prompt_seen = false;

  auto to_chunk = [&](const nn::Mat& frames) {
    MotionChunk chunk;
    chunk.fps = kCanonicalFps;
    chunk.instruction_seq = instruction_seq;
    for (Eigen::Index c = 0; c < frames.cols(); ++c) {
      MotionFrame f;
      f.root = res_->root;
      for (std::size_t d = 0; d < kNumDofs; ++d)
        f.dofs[d] = frames(static_cast<Eigen::Index>(d), c);
      chunk.frames.push_back(to_wire(f));
    }
    return chunk;
  };

  auto sink = [&](TokenId local) {
    if (g.cancel) throw Cancelled{};
    if (!prompt_seen) {
      prompt_seen = true;
      std::lock_guard lock(state_mutex_);
      status_.last_prompt = session_.last_prompt();
    }
    pending.push_back(local);
    if (static_cast<int>(pending.size()) < stream_.chunk_size()) return;
    const double t0 = steady_now_ms();
    nn::Mat frames = push_tokens(stream_, pending, dec);
    const double t1 = steady_now_ms();
    pending.clear();
    if (frames.cols() == 0) return;
    MotionChunk chunk = to_chunk(frames);
    if (first) {
      chunk.timing = ServerTiming{t0 - received_ms, t1 - t0, 0.0};
      first = false;
    }
    if (!g.queue.push(std::move(chunk))) throw Cancelled{};
  };

  try {
    generate(*res_->model, session_, conditions, sink);
    {
      std::lock_guard lock(state_mutex_);
      status_.history = session_.history();
    }
    if (!pending.empty()) push_tokens(stream_, pending, dec);
    nn::Mat rest = flush(stream_, dec);
    if (rest.cols() > 0) {
      MotionChunk chunk = to_chunk(rest);
      if (first) chunk.timing = ServerTiming{steady_now_ms() - received_ms, 0.0, 0.0};
      g.queue.push(std::move(chunk));
    }
    g.queue.push(End{instruction_seq});
  } catch (const Cancelled&) {
    std::lock_guard lock(state_mutex_);
    status_.history = session_.history();
    if (!pending.empty()) push_tokens(stream_, pending, dec);
    flush(stream_, dec);
  } catch (const Error& e) {
    spdlog::warn("generation failed: {}", e.what());
    flush(stream_, dec);
    {
      std::lock_guard lock(out_mutex_);
      if (g.aborted) return;
    }
    send_error(fmt::format("generation failed: {}", e.what()), instruction_seq);
    g.queue.push(End{0});
  }
}

void ServerConnection::transmit_from(Generation& g) {
  while (auto item = g.queue.pop()) {
    std::lock_guard lock(out_mutex_);
    if (g.aborted) return;
    WireMessage m{++out_seq_, session_id(), steady_now_ms(), {}};
    if (auto* chunk = std::get_if<MotionChunk>(&*item)) {
      chunk->first_frame_index = next_frame_;
      next_frame_ += chunk->frames.size();
      if (chunk->timing) chunk->timing->send_ms = m.timestamp_ms;
      const std::size_t n = chunk->frames.size();
      m.payload = std::move(*chunk);
      send_(encode_message(m));
      std::lock_guard s(state_mutex_);
      status_.frames_sent += n;
    } else {
      const End& end = std::get<End>(*item);
      if (end.instruction_seq != 0) {
        m.payload = Control{ControlAction::kStop, "complete", end.instruction_seq};
        send_(encode_message(m));
      } else {
        --out_seq_;
      }
      std::lock_guard s(state_mutex_);
      status_.active = false;
      return;
    }
  }
}

}  // namespace ua
