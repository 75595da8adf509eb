#pragma once

// JSON messages exchanged with the browser lab over a WebSocket, one message
// per text frame. Every frame carries "type" and "protocol_version"; client
// messages carry a client-chosen "ref" that the reply echoes.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "gyrolab/device.hpp"
#include "gyrolab/dynamics.hpp"
#include "gyrolab/session.hpp"

namespace gyrolab::gateway {

inline constexpr int kProtocolVersion = 1;

/// Partial wheel update; absent fields keep their current value.
struct SetParams {
  std::int64_t ref = 0;
  std::optional<double> mass_kg;
  std::optional<double> wheel_radius_m;
  std::optional<double> handle_length_m;
  std::optional<double> spin_rate_rad_s;
  std::optional<dynamics::InertiaModel> inertia_model;
  std::optional<double> gravity_m_s2;

  dynamics::WheelParams apply_to(dynamics::WheelParams base) const;
  friend bool operator==(const SetParams&, const SetParams&) = default;
};

struct Pointer {
  std::int64_t ref = 0;
  device::DeviceId device = device::DeviceId::kA;
  Vec3 position = Vec3::Zero();
  std::optional<std::int64_t> tick_hint;
  friend bool operator==(const Pointer&, const Pointer&) = default;
};

struct Start {
  std::int64_t ref = 0;
  friend bool operator==(const Start&, const Start&) = default;
};
struct Pause {
  std::int64_t ref = 0;
  friend bool operator==(const Pause&, const Pause&) = default;
};
struct Reset {
  std::int64_t ref = 0;
  friend bool operator==(const Reset&, const Reset&) = default;
};
struct LoadPreset {
  std::int64_t ref = 0;
  std::string name;
  friend bool operator==(const LoadPreset&, const LoadPreset&) = default;
};

using ClientMessage = std::variant<SetParams, Pointer, Start, Pause, Reset, LoadPreset>;

struct Snapshot {
  StateSnapshot state;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};
struct Ack {
  std::int64_t ref = 0;
  std::int64_t effective_tick = 0;
  friend bool operator==(const Ack&, const Ack&) = default;
};
struct ErrorReply {
  std::optional<std::int64_t> ref;
  std::string code;
  std::string message;
  friend bool operator==(const ErrorReply&, const ErrorReply&) = default;
};
struct Hello {
  nlohmann::json config;
  int protocol_version = kProtocolVersion;
  friend bool operator==(const Hello&, const Hello&) = default;
};

using ServerMessage = std::variant<Snapshot, Ack, ErrorReply, Hello>;

/// Error codes carried in ErrorReply::code.
namespace codes {
inline constexpr const char* kMalformed = "malformed";
inline constexpr const char* kUnknownType = "unknown_type";
inline constexpr const char* kProtocolVersion = "protocol_version";
inline constexpr const char* kInvalidParams = "invalid_params";
inline constexpr const char* kInvalidPointer = "invalid_pointer";
inline constexpr const char* kUnknownPreset = "unknown_preset";
inline constexpr const char* kHalted = "halted";
}  // namespace codes

/// Thrown by the parsers; carries the reply the server should send.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& message, std::optional<std::int64_t> ref = {})
      : std::runtime_error(message), code_(std::move(code)), ref_(ref) {}
  const std::string& code() const { return code_; }
  std::optional<std::int64_t> ref() const { return ref_; }
  ErrorReply reply() const { return {ref_, code_, what()}; }

 private:
  std::string code_;
  std::optional<std::int64_t> ref_;
};

std::string serialize(const ClientMessage& message);
std::string serialize(const ServerMessage& message);

ClientMessage parse_client(std::string_view text);
ServerMessage parse_server(std::string_view text);

/// Named wheel configurations for LoadPreset; nullopt for unknown names.
std::optional<dynamics::WheelParams> preset(std::string_view name, const dynamics::WheelParams& base);

}  // namespace gyrolab::gateway
