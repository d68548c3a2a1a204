#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ua/motion/motion.hpp"
#include "ua/tokenize/vocab.hpp"

namespace ua {

enum class MessageType { kInstruction, kMotionChunk, kControl, kAck, kLatencyProbe, kError };

std::string_view message_type_name(MessageType type);
// Throws ProtocolError for an unknown name.
MessageType parse_message_type(std::string_view name);

// 7 root values (px py pz qw qx qy qz) followed by the 29 DOFs.
inline constexpr std::size_t kWireFrameWidth = 7 + kNumDofs;
using WireFrame = std::array<double, kWireFrameWidth>;

WireFrame to_wire(const MotionFrame& frame);
MotionFrame from_wire(const WireFrame& frame);
// Rounds to 9 significant decimal digits, the precision carried on the wire.
double round_wire(double v);

struct TimingBreakdown {
  double motion_generation_ms = 0.0;
  double token_decode_ms = 0.0;
  double motion_track_ms = 0.0;
  double data_transmission_ms = 0.0;
  double model_latency_ms = 0.0;  // generation + decode + track
  double total_delay_ms = 0.0;

  void update_model_latency() {
    model_latency_ms = motion_generation_ms + token_decode_ms + motion_track_ms;
  }
  bool operator==(const TimingBreakdown&) const = default;
};

// Server-side stamps carried by the first chunk of each instruction.
struct ServerTiming {
  double motion_generation_ms = 0.0;
  double token_decode_ms = 0.0;
  double send_ms = 0.0;  // server clock
  bool operator==(const ServerTiming&) const = default;
};

struct Instruction {
  std::optional<std::string> text;
  std::optional<std::string> trajectory;  // trajectory file body
  std::optional<std::string> music;       // music feature file body
  bool operator==(const Instruction&) const = default;
};

struct MotionChunk {
  double fps = kCanonicalFps;
  std::uint64_t first_frame_index = 0;
  std::vector<WireFrame> frames;
  std::uint64_t instruction_seq = 0;
  std::optional<ServerTiming> timing;
  bool operator==(const MotionChunk&) const = default;
};

enum class ControlAction { kStart, kStop, kStatus };

struct Control {
  ControlAction action = ControlAction::kStatus;
  std::string reason;                // set by the server on a completed stop
  std::uint64_t instruction_seq = 0;
  bool operator==(const Control&) const = default;
};

struct SessionStatus {
  bool active = false;
  std::uint64_t frames_sent = 0;
  std::vector<TokenId> history;      // global motion ids
  std::vector<TokenId> last_prompt;  // global ids
  bool operator==(const SessionStatus&) const = default;
};

struct Ack {
  std::uint64_t ack_seq = 0;
  std::optional<SessionStatus> status;
  bool operator==(const Ack&) const = default;
};

struct LatencyProbe {
  double client_send_ms = 0.0;
  std::optional<double> server_time_ms;  // set in the reply
  bool operator==(const LatencyProbe&) const = default;
};

struct ErrorReply {
  std::string reason;
  std::optional<std::uint64_t> ref_seq;
  bool operator==(const ErrorReply&) const = default;
};

using Payload = std::variant<Instruction, MotionChunk, Control, Ack, LatencyProbe, ErrorReply>;

struct WireMessage {
  std::uint64_t seq = 0;
  std::string session;
  double timestamp_ms = 0.0;
  Payload payload;

  MessageType type() const { return static_cast<MessageType>(payload.index()); }
  bool operator==(const WireMessage&) const = default;
};

// One-line JSON text. Chunk frame values are rounded with round_wire, so
// decode(encode(m)) == m whenever m's frames already carry 9 digits.
// Throws ProtocolError for a chunk without frames.
std::string encode_message(const WireMessage& message);
// Throws ProtocolError on malformed JSON, a missing or mistyped field, an
// unknown type or action, a frame of the wrong width, or an empty chunk.
WireMessage decode_message(std::string_view text);

// Milliseconds on the process-wide steady clock.
double steady_now_ms();

}  // namespace ua
