#pragma once

// The per-tick haptic pipeline: handles -> commanded axle -> user torque ->
// one dynamics step -> reaction forces -> clamp.

#include <optional>
#include <vector>

#include "gyrolab/device.hpp"
#include "gyrolab/dynamics.hpp"
#include "gyrolab/haptics.hpp"

namespace gyrolab::haptics {

/// Anti-vibration spring pulling each handle toward the point on the
/// constraint sphere that matches the simulated axle.
struct Stabilizer {
  bool enabled = true;
  double stiffness_N_m = 50.0;
  double damping_N_s_m = 1.0;
  friend bool operator==(const Stabilizer&, const Stabilizer&) = default;
};

/// Angular spring-damper through which engaged handles steer the axle.
struct HoldGains {
  double stiffness_Nm_rad = 40.0;
  double damping_Nms_rad = 1.5;
  friend bool operator==(const HoldGains&, const HoldGains&) = default;
};

struct ServoConfig {
  DeviceCaps caps;
  device::CouplingMap coupling;
  Stabilizer stabilizer;
  HoldGains hold;
  double feel_gain = 1.0;
  std::vector<ForceEffect> effects;
};

/// Frames of the devices a hand is on; a missing frame means that device is
/// not engaged.
struct ServoInput {
  std::optional<HapticFrame> a;
  std::optional<HapticFrame> b;
};

struct ServoOutput {
  dynamics::RigidBodyState state;
  Vec3 force_a = Vec3::Zero();  // clamped, A frame
  Vec3 force_b = Vec3::Zero();  // clamped, B frame
  Vec3 raw_force_a = Vec3::Zero();
  Vec3 raw_force_b = Vec3::Zero();
  Vec3 axle = Vec3::UnitZ();
  Vec3 axle_rate = Vec3::Zero();  // angular velocity of the axle direction, world
  Vec3 angular_momentum = Vec3::Zero();
  Vec3 gravity_torque = Vec3::Zero();
  Vec3 user_torque = Vec3::Zero();
  HapticFrame frame_a;  // effective frames (virtual when not engaged)
  HapticFrame frame_b;
};

/// Angular velocity of the axle direction: the world angular velocity with
/// its along-axle (spin) component removed.
Vec3 axle_rate(const dynamics::RigidBodyState& state);

/// Commanded axle and its rate from whichever handles are engaged; nullopt
/// when none are. Zero handle positions fall back to `fallback_axle`.
struct Command {
  Vec3 axle;
  Vec3 rate;
};
std::optional<Command> commanded_axle(const ServoInput& input, const device::CouplingMap& map,
                                      const Vec3& fallback_axle);

/// One servo period. `inertia` must equal wheel_inertia(params).
/// Propagates NumericalBlowup from the dynamics step.
ServoOutput servo_tick(const ServoInput& input, const dynamics::RigidBodyState& sim,
                       const dynamics::WheelParams& params, const dynamics::InertiaTensor& inertia,
                       const ServoConfig& config);

}  // namespace gyrolab::haptics
