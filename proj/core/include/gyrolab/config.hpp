#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrolab/device.hpp"
#include "gyrolab/dynamics.hpp"
#include "gyrolab/servo.hpp"

namespace gyrolab {

/// Where a device's pose comes from in a session.
struct DeviceSpec {
  enum class Kind { kFree, kScripted, kInteractive };
  Kind kind = Kind::kFree;
  std::vector<device::TrajectorySample> trajectory;  // kScripted only

  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

struct SessionConfig {
  dynamics::WheelParams wheel;
  double initial_theta_rad = 1.5707963267948966;  // axle horizontal
  double initial_azimuth_rad = 0.0;
  haptics::ServoConfig servo;
  double dt = 0.001;
  std::int64_t snapshot_decimation = 16;
  std::int64_t release_ticks = 250;
  DeviceSpec device_a;
  DeviceSpec device_b;

  /// Throws kInvalidConfig listing every offending field.
  void validate() const;
};

nlohmann::json to_json(const dynamics::WheelParams& params);
dynamics::WheelParams wheel_params_from_json(const nlohmann::json& j,
                                             const dynamics::WheelParams& base = {});

nlohmann::json to_json(const haptics::ForceEffect& effect);
haptics::ForceEffect effect_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SessionConfig& config);

/// Parses and validates. Missing keys take their defaults; unknown keys are
/// rejected. `dt` and `device_caps.servo_rate_Hz` may each be omitted, in
/// which case one is derived from the other. Throws kInvalidConfig.
SessionConfig config_from_json(const nlohmann::json& j);

SessionConfig load_config(const std::string& path);

/// Canonical serialisation (sorted keys, round-trip exact doubles).
std::string canonical_dump(const SessionConfig& config);

/// Hex SHA-256 of canonical_dump().
std::string config_hash(const SessionConfig& config);

/// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace gyrolab
