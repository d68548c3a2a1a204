#include "ua/stream/client.hpp"

#include <chrono>
#include <deque>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ua/common/errors.hpp"
#include "ua/eval/pd.hpp"

namespace ua {
namespace {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

std::chrono::steady_clock::duration to_duration(double ms) {
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double, std::milli>(ms));
}

}  // namespace

struct StreamClient::Impl {
  net::io_context ioc{1};
  websocket::stream<beast::tcp_stream> ws{ioc};
  beast::flat_buffer buffer;
  std::deque<std::string> outbox;
  std::thread thread;
  std::atomic<bool> finished{false};
  bool open = false;

  void write_next() {
    ws.async_write(net::buffer(outbox.front()), [this](beast::error_code ec, std::size_t) {
      if (ec) {
        outbox.clear();
        return;
      }
      outbox.pop_front();
      if (!outbox.empty()) write_next();
    });
  }
};

StreamClient::StreamClient(ClientOptions options)
    : options_(std::move(options)),
      impl_(std::make_unique<Impl>()),
      cache_(std::make_unique<MotionCache>(options_.cache_capacity, options_.tick_ms)) {}

StreamClient::~StreamClient() { close(); }

void StreamClient::connect() {
  Impl& s = *impl_;
  try {
    tcp::resolver resolver(s.ioc);
    const auto results =
        resolver.resolve(options_.server.host, std::to_string(options_.server.port));
    auto& layer = beast::get_lowest_layer(s.ws);
    layer.expires_after(to_duration(options_.timeout_ms));
    layer.connect(results);
    s.ws.text(true);
    s.ws.handshake(options_.server.host, "/");
    layer.expires_never();
  } catch (const boost::system::system_error& e) {
    throw ProtocolError(fmt::format("cannot connect to {}:{}: {}", options_.server.host,
                                    options_.server.port, e.what()));
  }
  s.open = true;

  read_next();
  s.thread = std::thread([&s] {
    s.ioc.run();
    s.finished = true;
  });

  const std::uint64_t seq = send(Control{ControlAction::kStart, "", 0});
  auto reply = wait_for(
      [&](const WireMessage& m) {
        if (const auto* a = std::get_if<Ack>(&m.payload)) return a->ack_seq == seq;
        if (const auto* e = std::get_if<ErrorReply>(&m.payload)) return e->ref_seq == seq;
        return false;
      },
      options_.timeout_ms);
  if (!reply) throw ProtocolError("server did not open a session");
  if (const auto* e = std::get_if<ErrorReply>(&reply->message.payload))
    throw ProtocolError(fmt::format("session refused: {}", e->reason));
  session_ = reply->message.session;
}

void StreamClient::close() {
  Impl& s = *impl_;
  if (!s.open) return;
  s.open = false;
  net::post(s.ioc, [&s] {
    s.ws.async_close(websocket::close_code::normal, [](beast::error_code) {});
  });
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(1);
  while (!s.finished && std::chrono::steady_clock::now() < deadline)
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  s.ioc.stop();
  s.thread.join();
  cache_->close();
}

void StreamClient::read_next() {
  impl_->ws.async_read(impl_->buffer, [this](beast::error_code ec, std::size_t) {
    if (ec) {
      if (ec != websocket::error::closed && ec != net::error::operation_aborted)
        spdlog::debug("client read: {}", ec.message());
      cache_->close();
      std::lock_guard lock(log_mutex_);
      log_cv_.notify_all();
      return;
    }
    on_text(beast::buffers_to_string(impl_->buffer.data()));
    impl_->buffer.consume(impl_->buffer.size());
    read_next();
  });
}

void StreamClient::send_text(std::string text) {
  Impl& s = *impl_;
  net::post(s.ioc, [&s, text = std::move(text)]() mutable {
    s.outbox.push_back(std::move(text));
    if (s.outbox.size() > 1) return;
    s.write_next();
  });
}

std::uint64_t StreamClient::send(Payload payload) {
  const std::uint64_t seq = ++out_seq_;
  send_text(encode_message({seq, session_, steady_now_ms(), std::move(payload)}));
  return seq;
}

void StreamClient::on_text(const std::string& text) {
  const double now = steady_now_ms();
  WireMessage m;
  try {
    m = decode_message(text);
  } catch (const ProtocolError& e) {
    spdlog::warn("dropping malformed server message: {}", e.what());
    return;
  }
  if (const auto* chunk = std::get_if<MotionChunk>(&m.payload)) {
    try {
      cache_->push(chunk->first_frame_index, chunk->frames);
    } catch (const SequenceError& e) {
      std::lock_guard lock(log_mutex_);
      cache_error_ = e.what();
    }
  }
  std::lock_guard lock(log_mutex_);
  log_.push_back({std::move(m), now});
  log_cv_.notify_all();
}

std::optional<ReceivedMessage> StreamClient::wait_for(
    const std::function<bool(const WireMessage&)>& pred, double timeout_ms, std::size_t from) {
  const auto deadline = std::chrono::steady_clock::now() + to_duration(timeout_ms);
  std::unique_lock lock(log_mutex_);
  std::size_t i = from;
  for (;;) {
    for (; i < log_.size(); ++i)
      if (pred(log_[i].message)) return log_[i];
    if (impl_->finished) return std::nullopt;
    if (log_cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      for (; i < log_.size(); ++i)
        if (pred(log_[i].message)) return log_[i];
      return std::nullopt;
    }
  }
}

Ack StreamClient::wait_ack(std::uint64_t seq) {
  auto reply = wait_for(
      [&](const WireMessage& m) {
        if (const auto* a = std::get_if<Ack>(&m.payload)) return a->ack_seq == seq;
        if (const auto* e = std::get_if<ErrorReply>(&m.payload)) return e->ref_seq == seq;
        return false;
      },
      options_.timeout_ms);
  if (!reply) throw ProtocolError(fmt::format("no reply to message {}", seq));
  if (const auto* e = std::get_if<ErrorReply>(&reply->message.payload))
    throw ProtocolError(e->reason);
  return std::get<Ack>(reply->message.payload);
}

std::uint64_t StreamClient::instruct(const Instruction& instruction) {
  const std::uint64_t seq = send(instruction);
  wait_ack(seq);
  return seq;
}

Ack StreamClient::stop() { return wait_ack(send(Control{ControlAction::kStop, "", 0})); }

SessionStatus StreamClient::status() {
  const Ack ack = wait_ack(send(Control{ControlAction::kStatus, "", 0}));
  if (!ack.status) throw ProtocolError("status reply without status");
  return *ack.status;
}

bool StreamClient::wait_complete(std::uint64_t instruction_seq, double timeout_ms) {
  return wait_for(
             [&](const WireMessage& m) {
               const auto* c = std::get_if<Control>(&m.payload);
               return c && c->action == ControlAction::kStop &&
                      c->instruction_seq == instruction_seq;
             },
             timeout_ms)
      .has_value();
}

std::optional<ReceivedMessage> StreamClient::wait_first_chunk(std::uint64_t instruction_seq,
                                                              double timeout_ms) {
  return wait_for(
      [&](const WireMessage& m) {
        const auto* c = std::get_if<MotionChunk>(&m.payload);
        return c && c->instruction_seq == instruction_seq;
      },
      timeout_ms);
}

double StreamClient::probe_offset() {
  const double sent = steady_now_ms();
  const std::size_t from = log_size();
  send(LatencyProbe{sent, std::nullopt});
  auto reply = wait_for(
      [&](const WireMessage& m) {
        const auto* p = std::get_if<LatencyProbe>(&m.payload);
        return p && p->client_send_ms == sent && p->server_time_ms;
      },
      options_.timeout_ms, from);
  if (!reply) throw MeasurementError("latency probe timed out");
  const auto& p = std::get<LatencyProbe>(reply->message.payload);
  return *p.server_time_ms - 0.5 * (sent + reply->received_ms);
}

std::vector<ReceivedMessage> StreamClient::log() const {
  std::lock_guard lock(log_mutex_);
  return log_;
}

std::size_t StreamClient::log_size() const {
  std::lock_guard lock(log_mutex_);
  return log_.size();
}

std::optional<std::string> StreamClient::cache_error() const {
  std::lock_guard lock(log_mutex_);
  return cache_error_;
}

PlaybackTicker::PlaybackTicker(MotionCache& cache, Callback callback)
    : cache_(cache), callback_(std::move(callback)) {}

PlaybackTicker::~PlaybackTicker() { stop(); }

void PlaybackTicker::start() {
  if (running_.exchange(true)) return;
  thread_ = std::thread([this] {
    const auto start = std::chrono::steady_clock::now();
    const auto tick = to_duration(cache_.tick_ms());
    for (std::uint64_t k = 0; running_; ++k) {
      std::this_thread::sleep_until(start + tick * static_cast<long>(k));
      const double now = steady_now_ms();
      const CachePop pop = cache_.pop(now);
      {
        std::lock_guard lock(mutex_);
        records_.push_back({now, pop.index, pop.held, pop.frame.has_value()});
      }
      if (callback_) callback_(pop);
    }
  });
}

void PlaybackTicker::stop() {
  if (!running_.exchange(false)) return;
  thread_.join();
}

std::vector<PlaybackRecord> PlaybackTicker::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

TimingBreakdown measure_latency(StreamClient& client, const Instruction& instruction,
                                const KinematicModel& model, std::uint64_t* instruction_seq) {
  const double offset = client.probe_offset();
  const double sent = steady_now_ms();
  const std::uint64_t seq = client.send(instruction);
  if (instruction_seq) *instruction_seq = seq;
  auto first = client.wait_first_chunk(seq, 10000.0);
  if (!first) throw MeasurementError("no motion chunk arrived for the instruction");
  const auto& chunk = std::get<MotionChunk>(first->message.payload);
  if (!chunk.timing) throw MeasurementError("first chunk carries no server timing");

  const double track_start = steady_now_ms();
  std::vector<MotionFrame> frames;
  for (const WireFrame& f : chunk.frames) frames.push_back(from_wire(f));
  if (frames.size() == 1) frames.push_back(frames.front());
  simulate_track(MotionSequence(chunk.fps, std::move(frames)), PdConfig{}, model);
  const double track_end = steady_now_ms();

  TimingBreakdown t;
  t.motion_generation_ms = std::max(0.0, chunk.timing->motion_generation_ms);
  t.token_decode_ms = std::max(0.0, chunk.timing->token_decode_ms);
  t.motion_track_ms = track_end - track_start;
  t.data_transmission_ms = std::max(0.0, first->received_ms - (chunk.timing->send_ms - offset));
  t.update_model_latency();
  t.total_delay_ms = track_end - sent;
  return t;
}

}  // namespace ua
