#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>

#include "ua/causal/causal_decoder.hpp"
#include "ua/gen/layout.hpp"
#include "ua/gen/ngram.hpp"
#include "ua/gen/session.hpp"
#include "ua/stream/wire.hpp"
#include "ua/tokenize/text.hpp"

namespace ua {

// Root pose streamed with every generated frame; motion tokens carry joint
// angles only.
inline constexpr double kStreamRootHeight = 0.75;

struct StreamResources {
  std::shared_ptr<const TokenModel> model;
  std::shared_ptr<const CausalDecoderParams> decoder;
  std::shared_ptr<const TextVocab> vocab;         // text instructions
  std::shared_ptr<const CodecParams> music_codec; // optional, music instructions
  SessionOptions session;
  std::size_t queue_chunks = 64;  // frame queue bound between generation and transmission
  RootState root{Vec3(0.0, 0.0, kStreamRootHeight), Quat::Identity()};

  // Throws ConfigError for a missing model, decoder or vocabulary, an
  // untrained decoder, or a zero queue bound. Chunks follow the decoder's
  // chunk_size.
  void validate() const;
};

// Generation conditions for one instruction. Throws InputError for a
// malformed trajectory or music body and ConfigError for music without a
// music codec.
Conditions instruction_conditions(const Instruction& instruction, const StreamResources& res);

// Bounded queue between one producer and one consumer. push blocks while
// full; abort drops the contents and wakes both sides.
template <typename T>
class SpscQueue {
 public:
  explicit SpscQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return aborted_ || items_.size() < capacity_; });
    if (aborted_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return aborted_ || !items_.empty(); });
    if (aborted_) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void abort() {
    std::lock_guard lock(mutex_);
    aborted_ = true;
    items_.clear();
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool aborted_ = false;
};

// Server side of one connection, independent of the transport. Messages
// arrive through on_text; replies leave through the send callback, which may
// be called from several threads but never concurrently. Roles: the caller's
// thread parses and answers probes, a worker thread handles instructions and
// control, and per instruction a generation thread feeds a transmission
// thread through an SpscQueue.
class ServerConnection {
 public:
  using Send = std::function<void(std::string)>;

  ServerConnection(std::shared_ptr<const StreamResources> resources, Send send);
  ~ServerConnection();
  ServerConnection(const ServerConnection&) = delete;
  ServerConnection& operator=(const ServerConnection&) = delete;

  void on_text(std::string_view raw);

  // Empty until CONTROL(start).
  std::string session_id() const;
  SessionStatus status() const;

 private:
  struct Generation;
  struct Inbound {
    WireMessage message;
    double received_ms;
  };
  struct End {
    std::uint64_t instruction_seq;
  };
  using Outgoing = std::variant<MotionChunk, End>;

  void send_payload(Payload payload);
  void send_error(std::string reason, std::optional<std::uint64_t> ref_seq);
  void worker_loop();
  void handle(const Inbound& in);
  void start_generation(const Inbound& in, Conditions conditions);
  void cancel_generation();
  void generate_into(Generation& g, Conditions conditions, std::uint64_t instruction_seq,
                     double received_ms);
  void transmit_from(Generation& g);

  std::shared_ptr<const StreamResources> res_;
  Send send_;

  // Outbound ordering.
  std::mutex out_mutex_;
  std::uint64_t out_seq_ = 0;

  // Inbound state, touched by the caller of on_text only.
  std::uint64_t in_seq_ = 0;
  bool have_in_seq_ = false;

  mutable std::mutex state_mutex_;
  std::string session_id_;
  SessionStatus status_;

  std::mutex inbox_mutex_;
  std::condition_variable inbox_cv_;
  std::deque<Inbound> inbox_;
  bool closing_ = false;

  // Worker-thread state.
  GenerationSession session_;
  StreamState stream_;
  std::unique_ptr<Generation> active_;
  std::uint64_t next_frame_ = 0;  // touched by transmission threads, one at a time

  std::thread worker_;
};

}  // namespace ua
