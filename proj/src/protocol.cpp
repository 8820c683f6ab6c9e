#include "avm/protocol.hpp"

#include <algorithm>
#include <array>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>

#include "avm/config.hpp"
#include "avm/errors.hpp"
#include "avm/image.hpp"

namespace avm::protocol {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<MessageType, std::string_view>, 5> kTypeNames{{
    {MessageType::Frame, "frame"},
    {MessageType::State, "state"},
    {MessageType::Command, "command"},
    {MessageType::Ack, "ack"},
    {MessageType::Error, "error"},
}};

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("field '") + key + "' has the wrong type");
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json to_json(const std::optional<service::CadenceStats>& c) {
  if (!c) return nullptr;
  return {{"samples", c->samples}, {"mean_ms", c->mean_ms}, {"min_ms", c->min_ms},
          {"max_ms", c->max_ms},   {"stddev_ms", c->stddev_ms}};
}

}  // namespace

std::string to_string(MessageType type) {
  for (const auto& [t, name] : kTypeNames) {
    if (t == type) return std::string(name);
  }
  return "unknown";
}

std::optional<MessageType> message_type_from_string(std::string_view name) {
  for (const auto& [t, n] : kTypeNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

json to_json(const Envelope& env) {
  return {{"type", to_string(env.type)},
          {"seq", env.seq},
          {"timestamp_ms", env.timestamp_ms},
          {"payload", env.payload},
          {"v", env.v}};
}

Envelope envelope_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  Envelope env;
  const auto type_name = required<std::string>(j, "type");
  const auto type = message_type_from_string(type_name);
  if (!type) throw ProtocolError("unknown message type '" + type_name + "'");
  env.type = *type;
  env.seq = required<std::uint64_t>(j, "seq");
  env.timestamp_ms = j.contains("timestamp_ms") ? required<std::int64_t>(j, "timestamp_ms") : 0;
  env.v = j.contains("v") ? required<int>(j, "v") : kVersion;
  if (env.v != kVersion) throw ProtocolError("unsupported protocol version " + std::to_string(env.v));
  env.payload = j.contains("payload") ? j.at("payload") : json::object();
  if (!env.payload.is_object()) throw ProtocolError("payload must be an object");
  return env;
}

std::string serialize(const Envelope& env) { return to_json(env).dump(); }

Envelope parse(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("malformed JSON");
  return envelope_from_json(j);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
  std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<const char*>, 8, 6>;
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  const auto body = text.substr(0, text.size() - pad);
  const bool valid = std::all_of(body.begin(), body.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '/';
  });
  if (!valid) throw ProtocolError("invalid base64 character");
  std::vector<std::uint8_t> out(It(body.data()), It(body.data() + body.size()));
  out.resize(text.size() / 4 * 3 - pad);
  return out;
}

json to_json(const service::ViewState& state) {
  return {{"view", state.view.name()},
          {"overlay", state.overlay},
          {"calibration", state.calibration},
          {"manual_joints", state.manual_joints},
          {"manual_attitude", state.manual_attitude},
          {"joints", avm::to_json(state.joints)},
          {"attitude", avm::to_json(state.attitude)},
          {"pose", avm::to_json(state.pose)},
          {"commands_applied", state.commands_applied}};
}

json to_json(const service::PipelineStats& s) {
  return {{"fps", optional_json(s.fps)},
          {"fps_unpaced", s.fps_unpaced},
          {"mean_fps", s.mean_fps},
          {"min_window_fps", optional_json(s.min_window_fps)},
          {"latency_mean_ms", s.latency_mean_ms},
          {"latency_max_ms", s.latency_max_ms},
          {"joints_cadence", to_json(s.joints_cadence)},
          {"attitude_cadence", to_json(s.attitude_cadence)},
          {"frames_published", s.frames_published},
          {"dropped_frames", s.dropped_frames},
          {"elapsed_s", s.elapsed_s}};
}

json state_payload(const service::ViewState& state, const service::PipelineStats& stats) {
  return {{"state", to_json(state)}, {"stats", to_json(stats)}};
}

json frame_payload(const service::PublishedFrame& frame, std::span<const std::uint8_t> png) {
  return {{"view", frame.view.name()},
          {"frame_seq", frame.seq},
          {"frame_timestamp_ms", frame.timestamp_ms},
          {"telemetry_ms", frame.telemetry_ms},
          {"width", frame.image ? frame.image->width() : 0},
          {"height", frame.image ? frame.image->height() : 0},
          {"encoding", "png"},
          {"transport", "base64"},
          {"data", base64_encode(png)}};
}

json command_payload(const service::Command& cmd) { return {{"name", cmd.name}, {"args", cmd.args}}; }

service::Command command_from_payload(const json& payload) {
  service::Command cmd;
  cmd.name = required<std::string>(payload, "name");
  if (payload.contains("args")) {
    cmd.args = payload.at("args");
    if (cmd.args.is_null()) cmd.args = json::object();
    if (!cmd.args.is_object()) throw ProtocolError("command args must be an object");
  }
  return cmd;
}

Envelope Session::make(MessageType type, json payload) {
  Envelope env;
  env.type = type;
  env.seq = ++seq_;
  env.timestamp_ms = pipeline_.clock_ms();
  env.payload = std::move(payload);
  return env;
}

Envelope Session::error(std::optional<std::uint64_t> ack_seq, std::string_view code, std::string_view message) {
  return make(MessageType::Error, {{"ack_seq", ack_seq ? json(*ack_seq) : json(nullptr)},
                                   {"code", code},
                                   {"message", message}});
}

Envelope Session::state_message() {
  return make(MessageType::State, state_payload(pipeline_.view_state(), pipeline_.stats_report()));
}

Envelope Session::frame_message(const service::PublishedFrame& frame) {
  const auto png = frame.image ? encode_png(*frame.image, png_level_) : std::vector<std::uint8_t>{};
  return frame_message(frame, png);
}

Envelope Session::frame_message(const service::PublishedFrame& frame, std::span<const std::uint8_t> png) {
  return make(MessageType::Frame, frame_payload(frame, png));
}

std::vector<Envelope> Session::handle_text(std::string_view text) {
  Envelope in;
  try {
    in = parse(text);
  } catch (const ProtocolError& e) {
    return {error(std::nullopt, kErrProtocol, e.what())};
  }
  if (in.type != MessageType::Command) {
    return {error(in.seq, kErrProtocol, "clients may only send command messages")};
  }
  try {
    const auto cmd = command_from_payload(in.payload);
    const auto state = pipeline_.handle_command(cmd);
    std::vector<Envelope> out;
    out.push_back(make(MessageType::Ack, {{"ack_seq", in.seq}, {"command", cmd.name}, {"state", to_json(state)}}));
    if (cmd.name == "snapshot") out.push_back(frame_message(*pipeline_.snapshot()));
    return out;
  } catch (const ProtocolError& e) {
    return {error(in.seq, kErrProtocol, e.what())};
  } catch (const service::UnknownCommandError& e) {
    return {error(in.seq, kErrUnknownCommand, e.what())};
  } catch (const ValidationError& e) {
    return {error(in.seq, kErrValidation, e.what())};
  }
}

}  // namespace avm::protocol
