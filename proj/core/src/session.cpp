#include "gyrolab/session.hpp"

#include <cmath>
#include <numbers>

#include "gyrolab/error.hpp"

namespace gyrolab {
namespace {

using nlohmann::json;

device::PoseSource make_source(const DeviceSpec& spec, std::int64_t release_ticks) {
  switch (spec.kind) {
    case DeviceSpec::Kind::kScripted:
      return device::PoseSource(device::ScriptedSource(spec.trajectory));
    case DeviceSpec::Kind::kInteractive:
      return device::PoseSource(device::InteractiveSource{}, release_ticks);
    case DeviceSpec::Kind::kFree:
      break;
  }
  return device::PoseSource{};
}

double wrap_phase(double phase) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::fmod(phase, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

}  // namespace

json to_json(const SessionEvent& event) {
  return std::visit(
      [&event](const auto& input) -> json {
        using T = std::decay_t<decltype(input)>;
        if constexpr (std::is_same_v<T, SessionEvent::Params>) {
          return json{{"tick", event.tick}, {"kind", "params"}, {"params", to_json(input.params)}};
        } else if constexpr (std::is_same_v<T, SessionEvent::Pointer>) {
          return json{{"tick", event.tick},
                      {"kind", "pointer"},
                      {"device", device::to_string(input.device)},
                      {"position", {input.position.x(), input.position.y(), input.position.z()}}};
        } else {
          return json{{"tick", event.tick}, {"kind", "reset"}};
        }
      },
      event.input);
}

SessionEvent event_from_json(const json& j) {
  try {
    SessionEvent event;
    event.tick = j.at("tick").get<std::int64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "params") {
      event.input = SessionEvent::Params{wheel_params_from_json(j.at("params"))};
    } else if (kind == "pointer") {
      const auto device = j.at("device").get<std::string>();
      if (device != "A" && device != "B") throw Error(ErrorCode::kParse, "unknown device " + device);
      const auto& p = j.at("position");
      event.input = SessionEvent::Pointer{
          device == "A" ? device::DeviceId::kA : device::DeviceId::kB,
          Vec3{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()}};
    } else if (kind == "reset") {
      event.input = SessionEvent::Reset{};
    } else {
      throw Error(ErrorCode::kParse, "unknown event kind " + kind);
    }
    return event;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed event: ") + e.what());
  }
}

Session::Session(SessionConfig config) : config_(std::move(config)) {
  config_.validate();
  params_ = config_.wheel;
  inertia_ = dynamics::wheel_inertia(params_);
  state_ = initial_state(params_);
  source_a_ = make_source(config_.device_a, config_.release_ticks);
  source_b_ = make_source(config_.device_b, config_.release_ticks);
}

dynamics::RigidBodyState Session::initial_state(const dynamics::WheelParams& params) const {
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(config_.initial_theta_rad, config_.initial_azimuth_rad);
  s.omega_body = Vec3{0.0, 0.0, params.spin_rate_rad_s};
  return s;
}

std::int64_t Session::set_params(const dynamics::WheelParams& params) {
  params.validate();
  std::lock_guard lock(staging_mutex_);
  staged_params_ = params;
  return next_boundary_;
}

std::int64_t Session::stage_pointer(device::DeviceId id, const Vec3& position) {
  if (!position.allFinite()) {
    throw Error(ErrorCode::kInvalidParameter, "pointer position must be finite");
  }
  std::lock_guard lock(staging_mutex_);
  (id == device::DeviceId::kA ? source_a_ : source_b_).command(position);
  return next_boundary_;
}

std::int64_t Session::stage_reset() {
  std::lock_guard lock(staging_mutex_);
  staged_reset_ = true;
  return next_boundary_;
}

std::int64_t Session::next_boundary() const {
  std::lock_guard lock(staging_mutex_);
  return next_boundary_;
}

void Session::apply_staged() {
  // Called with staging_mutex_ held, at boundary state_.tick.
  const std::int64_t boundary = state_.tick;
  if (staged_reset_) {
    staged_reset_ = false;
    params_ = config_.wheel;
    inertia_ = dynamics::wheel_inertia(params_);
    state_ = initial_state(params_);
    state_.tick = boundary;
    state_.t = static_cast<double>(boundary) * config_.dt;
    phase_ = 0.0;
    source_a_.reset();
    source_b_.reset();
    events_.push_back({boundary, SessionEvent::Reset{}});
  }
  if (staged_params_) {
    const dynamics::WheelParams next = *staged_params_;
    staged_params_.reset();
    if (next.spin_rate_rad_s != params_.spin_rate_rad_s) {
      state_.omega_body.z() = next.spin_rate_rad_s;
    }
    params_ = next;
    inertia_ = dynamics::wheel_inertia(params_);
    events_.push_back({boundary, SessionEvent::Params{next}});
  }
}

std::optional<TraceRecord> Session::tick() {
  if (halted_) throw Error(ErrorCode::kHalted, "session halted after a numerical blowup");

  const std::int64_t boundary = state_.tick;
  const double dt = config_.dt;
  device::PolledPose polled_a;
  device::PolledPose polled_b;
  {
    std::lock_guard lock(staging_mutex_);
    apply_staged();
    polled_a = source_a_.poll(boundary, dt);
    polled_b = source_b_.poll(boundary, dt);
    next_boundary_ = boundary + 1;
  }
  if (polled_a.fresh) {
    events_.push_back({boundary, SessionEvent::Pointer{device::DeviceId::kA, *polled_a.fresh}});
  }
  if (polled_b.fresh) {
    events_.push_back({boundary, SessionEvent::Pointer{device::DeviceId::kB, *polled_b.fresh}});
  }

  haptics::ServoInput input;
  if (polled_a.engaged) {
    input.a = haptics::HapticFrame{polled_a.pose.position, polled_a.pose.velocity, boundary, dt};
  }
  if (polled_b.engaged) {
    input.b = haptics::HapticFrame{polled_b.pose.position, polled_b.pose.velocity, boundary, dt};
  }

  try {
    last_output_ = haptics::servo_tick(input, state_, params_, inertia_, config_.servo);
  } catch (const NumericalBlowup&) {
    halted_ = true;
    throw;
  }
  state_ = last_output_->state;
  phase_ = wrap_phase(phase_ + state_.omega_body.z() * dt);

  if (state_.tick % config_.snapshot_decimation != 0) return std::nullopt;
  return current();
}

TraceRecord Session::current() const {
  TraceRecord record;
  StateSnapshot& s = record.snapshot;
  s.tick = state_.tick;
  s.t = static_cast<double>(state_.tick) * config_.dt;
  s.axle = dynamics::axle_direction(state_.orientation);
  s.theta = dynamics::polar_angle(state_.orientation);
  s.wheel_phase = phase_;
  s.angular_momentum = dynamics::angular_momentum(inertia_, state_.omega_body, state_.orientation);
  s.torque = dynamics::gravity_torque(params_, state_.orientation);
  s.omega = state_.omega_body.z();
  if (last_output_) {
    s.force_a = last_output_->force_a;
    s.force_b = last_output_->force_b;
    record.pose_a = last_output_->frame_a.position;
    record.pose_b = last_output_->frame_b.position;
  } else {
    const Vec3 tip = config_.servo.coupling.sphere_radius_m * s.axle;
    record.pose_a = tip;
    record.pose_b = device::couple(tip, config_.servo.coupling);
  }
  return record;
}

std::vector<TraceRecord> run_ticks(Session& session, std::int64_t ticks) {
  std::vector<TraceRecord> records;
  for (std::int64_t i = 0; i < ticks; ++i) {
    if (auto record = session.tick()) records.push_back(std::move(*record));
  }
  return records;
}

}  // namespace gyrolab
