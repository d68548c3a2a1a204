#include "ua/stream/wire.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include <json.hpp>

#include "ua/common/errors.hpp"

namespace ua {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 6> kTypeNames{
    "INSTRUCTION", "MOTION_CHUNK", "CONTROL", "ACK", "LATENCY_PROBE", "ERROR"};
constexpr std::array<std::string_view, 3> kActionNames{"start", "stop", "status"};

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ProtocolError(fmt::format("missing field '{}'", name));
  return *it;
}

double number(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number()) throw ProtocolError(fmt::format("field '{}' must be a number", name));
  return v.get<double>();
}

std::uint64_t unsigned_int(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_unsigned())
    throw ProtocolError(fmt::format("field '{}' must be a nonnegative integer", name));
  return v.get<std::uint64_t>();
}

std::string text(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) throw ProtocolError(fmt::format("field '{}' must be a string", name));
  return v.get<std::string>();
}

std::optional<std::string> optional_text(const json& obj, const char* name) {
  if (!obj.contains(name)) return std::nullopt;
  return text(obj, name);
}

const json& object(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_object()) throw ProtocolError(fmt::format("field '{}' must be an object", name));
  return v;
}

std::vector<TokenId> token_list(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_array()) throw ProtocolError(fmt::format("field '{}' must be an array", name));
  std::vector<TokenId> out;
  for (const json& t : v) {
    if (!t.is_number_unsigned()) throw ProtocolError(fmt::format("bad token in '{}'", name));
    out.push_back(t.get<TokenId>());
  }
  return out;
}

json encode_payload(const Instruction& p) {
  json out = json::object();
  if (p.text) out["text"] = *p.text;
  if (p.trajectory) out["trajectory"] = *p.trajectory;
  if (p.music) out["music"] = *p.music;
  return out;
}

json encode_payload(const MotionChunk& p) {
  if (p.frames.empty()) throw ProtocolError("MOTION_CHUNK needs at least one frame");
  json frames = json::array();
  for (const WireFrame& f : p.frames) {
    json row = json::array();
    for (double v : f) {
      if (!std::isfinite(v)) throw ProtocolError("non-finite frame value");
      row.push_back(round_wire(v));
    }
    frames.push_back(std::move(row));
  }
  json out{{"fps", p.fps},
           {"first_frame_index", p.first_frame_index},
           {"instruction_seq", p.instruction_seq},
           {"frames", std::move(frames)}};
  if (p.timing) {
    out["timing"] = {{"motion_generation_ms", p.timing->motion_generation_ms},
                     {"token_decode_ms", p.timing->token_decode_ms},
                     {"send_ms", p.timing->send_ms}};
  }
  return out;
}

json encode_payload(const Control& p) {
  json out{{"action", kActionNames[static_cast<std::size_t>(p.action)]}};
  if (!p.reason.empty()) out["reason"] = p.reason;
  if (p.instruction_seq != 0) out["instruction_seq"] = p.instruction_seq;
  return out;
}

json encode_payload(const Ack& p) {
  json out{{"ack_seq", p.ack_seq}};
  if (p.status) {
    out["status"] = {{"active", p.status->active},
                     {"frames_sent", p.status->frames_sent},
                     {"history", p.status->history},
                     {"last_prompt", p.status->last_prompt}};
  }
  return out;
}

json encode_payload(const LatencyProbe& p) {
  json out{{"client_send_ms", p.client_send_ms}};
  if (p.server_time_ms) out["server_time_ms"] = *p.server_time_ms;
  return out;
}

json encode_payload(const ErrorReply& p) {
  json out{{"reason", p.reason}};
  if (p.ref_seq) out["ref_seq"] = *p.ref_seq;
  return out;
}

Instruction decode_instruction(const json& p) {
  return {optional_text(p, "text"), optional_text(p, "trajectory"), optional_text(p, "music")};
}

MotionChunk decode_chunk(const json& p) {
  MotionChunk out;
  out.fps = number(p, "fps");
  if (!(out.fps > 0.0)) throw ProtocolError("fps must be positive");
  out.first_frame_index = unsigned_int(p, "first_frame_index");
  if (p.contains("instruction_seq")) out.instruction_seq = unsigned_int(p, "instruction_seq");
  const json& frames = field(p, "frames");
  if (!frames.is_array() || frames.empty())
    throw ProtocolError("MOTION_CHUNK needs at least one frame");
  for (const json& row : frames) {
    if (!row.is_array() || row.size() != kWireFrameWidth)
      throw ProtocolError(fmt::format("frame must hold {} numbers", kWireFrameWidth));
    WireFrame f{};
    for (std::size_t i = 0; i < kWireFrameWidth; ++i) {
      if (!row[i].is_number()) throw ProtocolError("frame values must be numbers");
      f[i] = row[i].get<double>();
    }
    out.frames.push_back(f);
  }
  if (p.contains("timing")) {
    const json& t = object(p, "timing");
    out.timing = ServerTiming{number(t, "motion_generation_ms"), number(t, "token_decode_ms"),
                              number(t, "send_ms")};
  }
  return out;
}

Control decode_control(const json& p) {
  Control out;
  const std::string action = text(p, "action");
  std::size_t i = 0;
  while (i < kActionNames.size() && kActionNames[i] != action) ++i;
  if (i == kActionNames.size()) throw ProtocolError(fmt::format("unknown action '{}'", action));
  out.action = static_cast<ControlAction>(i);
  if (p.contains("reason")) out.reason = text(p, "reason");
  if (p.contains("instruction_seq")) out.instruction_seq = unsigned_int(p, "instruction_seq");
  return out;
}

Ack decode_ack(const json& p) {
  Ack out;
  out.ack_seq = unsigned_int(p, "ack_seq");
  if (p.contains("status")) {
    const json& s = object(p, "status");
    const json& active = field(s, "active");
    if (!active.is_boolean()) throw ProtocolError("field 'active' must be a boolean");
    out.status = SessionStatus{active.get<bool>(), unsigned_int(s, "frames_sent"),
                               token_list(s, "history"), token_list(s, "last_prompt")};
  }
  return out;
}

LatencyProbe decode_probe(const json& p) {
  LatencyProbe out;
  out.client_send_ms = number(p, "client_send_ms");
  if (p.contains("server_time_ms")) out.server_time_ms = number(p, "server_time_ms");
  return out;
}

ErrorReply decode_error(const json& p) {
  ErrorReply out;
  out.reason = text(p, "reason");
  if (p.contains("ref_seq")) out.ref_seq = unsigned_int(p, "ref_seq");
  return out;
}

}  // namespace

std::string_view message_type_name(MessageType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

MessageType parse_message_type(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == name) return static_cast<MessageType>(i);
  throw ProtocolError(fmt::format("unknown message type '{}'", name));
}

WireFrame to_wire(const MotionFrame& frame) {
  WireFrame out{};
  const RootState& r = frame.root;
  out[0] = r.position.x();
  out[1] = r.position.y();
  out[2] = r.position.z();
  out[3] = r.orientation.w();
  out[4] = r.orientation.x();
  out[5] = r.orientation.y();
  out[6] = r.orientation.z();
  for (std::size_t i = 0; i < kNumDofs; ++i) out[7 + i] = frame.dofs[i];
  return out;
}

MotionFrame from_wire(const WireFrame& f) {
  MotionFrame out;
  out.root.position = Vec3(f[0], f[1], f[2]);
  out.root.orientation = Quat(f[3], f[4], f[5], f[6]);
  // Nine digits leave the quaternion unit only to ~1e-9.
  out.root.orientation.normalize();
  for (std::size_t i = 0; i < kNumDofs; ++i) out.dofs[i] = f[7 + i];
  return out;
}

double round_wire(double v) {
  const std::string s = fmt::format("{:.9g}", v);
  return std::strtod(s.c_str(), nullptr);
}

std::string encode_message(const WireMessage& message) {
  json payload = std::visit([](const auto& p) { return encode_payload(p); }, message.payload);
  json out{{"type", message_type_name(message.type())},
           {"seq", message.seq},
           {"session", message.session},
           {"timestamp_ms", message.timestamp_ms},
           {"payload", std::move(payload)}};
  return out.dump();
}

WireMessage decode_message(std::string_view raw) {
  json doc;
  try {
    doc = json::parse(raw);
  } catch (const json::exception& e) {
    throw ProtocolError(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ProtocolError("message must be a JSON object");
  WireMessage out;
  const MessageType type = parse_message_type(text(doc, "type"));
  out.seq = unsigned_int(doc, "seq");
  out.session = text(doc, "session");
  out.timestamp_ms = number(doc, "timestamp_ms");
  const json& p = object(doc, "payload");
  switch (type) {
    case MessageType::kInstruction: out.payload = decode_instruction(p); break;
    case MessageType::kMotionChunk: out.payload = decode_chunk(p); break;
    case MessageType::kControl: out.payload = decode_control(p); break;
    case MessageType::kAck: out.payload = decode_ack(p); break;
    case MessageType::kLatencyProbe: out.payload = decode_probe(p); break;
    case MessageType::kError: out.payload = decode_error(p); break;
  }
  return out;
}

double steady_now_ms() {
  using namespace std::chrono;
  static const steady_clock::time_point epoch = steady_clock::now();
  return duration<double, std::milli>(steady_clock::now() - epoch).count();
}

}  // namespace ua
