#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ua/motion/kinematics.hpp"
#include "ua/stream/cache.hpp"
#include "ua/stream/server.hpp"
#include "ua/stream/wire.hpp"

namespace ua {

struct ClientOptions {
  Endpoint server{"127.0.0.1", 0};
  std::size_t cache_capacity = 15000;  // 5 min at 50 Hz
  double tick_ms = kPlaybackTickMs;
  double timeout_ms = 5000.0;  // replies, probes and connection setup
};

struct ReceivedMessage {
  WireMessage message;
  double received_ms;  // client clock
};

// WebSocket client. A background network thread receives messages, pushes
// chunk frames into the cache and logs every message; calls on the owning
// thread send and wait.
class StreamClient {
 public:
  explicit StreamClient(ClientOptions options);
  ~StreamClient();
  StreamClient(const StreamClient&) = delete;
  StreamClient& operator=(const StreamClient&) = delete;

  // Connects and opens a session with CONTROL(start). Throws ProtocolError
  // when the server refuses or does not answer in time.
  void connect();
  void close();
  const std::string& session() const { return session_; }

  // Sends a payload and returns its seq.
  std::uint64_t send(Payload payload);
  // Sends raw text (for protocol tests); does not consume a seq.
  void send_text(std::string text);
  std::uint64_t next_seq() const { return out_seq_ + 1; }

  // Waits for the ACK (or ERROR) referring to `seq`. Throws ProtocolError
  // on ERROR or timeout.
  Ack wait_ack(std::uint64_t seq);
  std::uint64_t instruct(const Instruction& instruction);
  Ack stop();
  SessionStatus status();
  // Waits until the server reports the instruction complete. Returns false
  // on timeout.
  bool wait_complete(std::uint64_t instruction_seq, double timeout_ms);
  // First chunk generated for the instruction, with its arrival time.
  std::optional<ReceivedMessage> wait_first_chunk(std::uint64_t instruction_seq,
                                                  double timeout_ms);
  // First message matching `pred` at or after log position `from`.
  std::optional<ReceivedMessage> wait_for(const std::function<bool(const WireMessage&)>& pred,
                                          double timeout_ms, std::size_t from = 0);

  // Estimated server clock minus client clock from one probe round trip.
  // Throws MeasurementError on timeout.
  double probe_offset();

  MotionCache& cache() { return *cache_; }
  std::vector<ReceivedMessage> log() const;
  std::size_t log_size() const;
  // A SequenceError raised by a cache push, if any.
  std::optional<std::string> cache_error() const;

 private:
  struct Impl;
  void on_text(const std::string& text);
  void read_next();

  ClientOptions options_;
  std::unique_ptr<Impl> impl_;
  std::unique_ptr<MotionCache> cache_;
  std::string session_;
  std::uint64_t out_seq_ = 0;

  mutable std::mutex log_mutex_;
  std::condition_variable log_cv_;
  std::vector<ReceivedMessage> log_;
  std::optional<std::string> cache_error_;
};

struct PlaybackRecord {
  double wall_ms;     // when the pop happened
  std::uint64_t index;
  bool held;
  bool has_frame;
};

// Pops the cache on a fixed tick from its own thread and records each pop.
class PlaybackTicker {
 public:
  using Callback = std::function<void(const CachePop&)>;

  explicit PlaybackTicker(MotionCache& cache, Callback callback = {});
  ~PlaybackTicker();
  void start();
  void stop();
  std::vector<PlaybackRecord> records() const;

 private:
  MotionCache& cache_;
  Callback callback_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  mutable std::mutex mutex_;
  std::vector<PlaybackRecord> records_;
};

// Clock offset via LATENCY_PROBE, then one instruction: generation and
// decode come from the server stamps on the first chunk, transmission from
// its send stamp shifted by the offset, track from PD-tracking that chunk
// on the client, and total from instruction send to the tracked first chunk.
// Throws MeasurementError on a probe or chunk timeout. The instruction's seq
// is stored in `instruction_seq` when given.
TimingBreakdown measure_latency(StreamClient& client, const Instruction& instruction,
                                const KinematicModel& model,
                                std::uint64_t* instruction_seq = nullptr);

}  // namespace ua
