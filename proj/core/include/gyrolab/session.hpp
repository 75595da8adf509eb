#pragma once

// Fixed-rate orchestration of one wheel, two devices and their effects.
//
// A Session is single-writer: exactly one thread calls tick(). Parameter
// changes, pointer positions and resets may be staged from any thread; they
// take effect at the next tick boundary and are logged so the run can be
// replayed exactly.

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "gyrolab/config.hpp"
#include "gyrolab/device.hpp"
#include "gyrolab/dynamics.hpp"
#include "gyrolab/servo.hpp"

namespace gyrolab {

struct StateSnapshot {
  std::int64_t tick = 0;
  double t = 0.0;
  Vec3 axle = Vec3::UnitZ();
  double theta = 0.0;
  double wheel_phase = 0.0;  // [0, 2 pi), drives the rendered spin only
  Vec3 angular_momentum = Vec3::Zero();
  Vec3 torque = Vec3::Zero();  // gravity torque about the pivot
  Vec3 force_a = Vec3::Zero();
  Vec3 force_b = Vec3::Zero();
  double omega = 0.0;  // spin rate about the axle

  friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;
};

struct TraceRecord {
  StateSnapshot snapshot;
  Vec3 pose_a = Vec3::Zero();
  Vec3 pose_b = Vec3::Zero();

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// An input applied at a tick boundary.
struct SessionEvent {
  struct Params {
    dynamics::WheelParams params;
  };
  struct Pointer {
    device::DeviceId device;
    Vec3 position;
  };
  struct Reset {};

  std::int64_t tick = 0;  // boundary the event was applied at
  std::variant<Params, Pointer, Reset> input;
};

nlohmann::json to_json(const SessionEvent& event);
SessionEvent event_from_json(const nlohmann::json& j);

class Session {
 public:
  /// Throws kInvalidConfig listing the offending fields.
  explicit Session(SessionConfig config);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const SessionConfig& config() const { return config_; }

  /// Validates and stages new wheel parameters. Orientation and body rates
  /// carry over; a changed spin rate replaces the spin component. Returns
  /// the boundary tick at which the change applies. Throws kInvalidParameter
  /// and leaves the session untouched when `params` is invalid.
  std::int64_t set_params(const dynamics::WheelParams& params);

  /// Stages a pointer position for an interactive device. Returns the
  /// boundary tick at which it is consumed. Throws kInvalidSource when the
  /// device is not interactive.
  std::int64_t stage_pointer(device::DeviceId id, const Vec3& position);

  /// Stages a return to the configured initial condition; the tick count
  /// keeps running.
  std::int64_t stage_reset();

  /// Boundary at which anything staged now takes effect.
  std::int64_t next_boundary() const;

  /// Advances one servo period. Returns a record every
  /// `snapshot_decimation` ticks. On a numerical blowup the session halts
  /// and the NumericalBlowup propagates; later calls throw kHalted.
  std::optional<TraceRecord> tick();

  /// Record describing the current state, e.g. tick 0 before any step.
  TraceRecord current() const;

  std::int64_t tick_index() const { return state_.tick; }
  bool halted() const { return halted_; }
  const dynamics::RigidBodyState& state() const { return state_; }
  const dynamics::WheelParams& params() const { return params_; }
  const dynamics::InertiaTensor& inertia() const { return inertia_; }
  double wheel_phase() const { return phase_; }

  /// Full servo output of the most recent tick (pre-clamp forces included).
  const std::optional<haptics::ServoOutput>& last_output() const { return last_output_; }

  /// Inputs applied so far, in order.
  const std::vector<SessionEvent>& events() const { return events_; }

 private:
  dynamics::RigidBodyState initial_state(const dynamics::WheelParams& params) const;
  void apply_staged();

  SessionConfig config_;
  dynamics::WheelParams params_;
  dynamics::InertiaTensor inertia_;
  dynamics::RigidBodyState state_;
  double phase_ = 0.0;
  std::atomic<bool> halted_{false};
  std::optional<haptics::ServoOutput> last_output_;
  device::PoseSource source_a_;
  device::PoseSource source_b_;
  std::vector<SessionEvent> events_;

  mutable std::mutex staging_mutex_;
  std::optional<dynamics::WheelParams> staged_params_;
  bool staged_reset_ = false;
  std::int64_t next_boundary_ = 0;
};

/// Runs `ticks` ticks and returns every emitted record.
std::vector<TraceRecord> run_ticks(Session& session, std::int64_t ticks);

}  // namespace gyrolab
