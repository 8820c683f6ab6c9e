#pragma once

// JSON message envelopes exchanged with operator clients, plus the
// per-connection dispatcher that turns incoming commands into replies.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avm/pipeline.hpp"

namespace avm::protocol {

inline constexpr int kVersion = 1;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MessageType { Frame, State, Command, Ack, Error };

std::string to_string(MessageType type);
std::optional<MessageType> message_type_from_string(std::string_view name);

struct Envelope {
  MessageType type = MessageType::State;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  nlohmann::json payload = nlohmann::json::object();
  int v = kVersion;
};

nlohmann::json to_json(const Envelope& env);
/// Unknown fields are ignored. Throws ProtocolError on a missing or mistyped
/// required field, an unknown type or a version other than 1.
Envelope envelope_from_json(const nlohmann::json& j);
std::string serialize(const Envelope& env);
Envelope parse(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Payload builders.
nlohmann::json to_json(const service::ViewState& state);
nlohmann::json to_json(const service::PipelineStats& stats);
nlohmann::json state_payload(const service::ViewState& state, const service::PipelineStats& stats);
/// `png` is the already encoded frame image.
nlohmann::json frame_payload(const service::PublishedFrame& frame, std::span<const std::uint8_t> png);
nlohmann::json command_payload(const service::Command& cmd);
service::Command command_from_payload(const nlohmann::json& payload);

/// Error codes carried by `error` messages.
inline constexpr std::string_view kErrValidation = "validation";
inline constexpr std::string_view kErrUnknownCommand = "unknown_command";
inline constexpr std::string_view kErrProtocol = "protocol";

/// Server side of one client connection. Not thread-safe; the pipeline is.
class Session {
 public:
  explicit Session(service::Pipeline& pipeline, int png_level = 1) : pipeline_(pipeline), png_level_(png_level) {}

  /// Replies for one incoming text message: `ack` (plus a `frame` for
  /// snapshot) or a single `error`.
  std::vector<Envelope> handle_text(std::string_view text);

  Envelope state_message();
  Envelope frame_message(const service::PublishedFrame& frame);
  Envelope frame_message(const service::PublishedFrame& frame, std::span<const std::uint8_t> png);

 private:
  Envelope make(MessageType type, nlohmann::json payload);
  Envelope error(std::optional<std::uint64_t> ack_seq, std::string_view code, std::string_view message);

  service::Pipeline& pipeline_;
  int png_level_;
  std::uint64_t seq_ = 0;
};

}  // namespace avm::protocol
