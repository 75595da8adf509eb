#include "gyrolab/servo.hpp"

#include "gyrolab/error.hpp"

namespace gyrolab::haptics {
namespace {

using device::CouplingMap;
using device::couple;
using device::to_partner_frame;

Vec3 constrained_or(const Vec3& raw, double radius, const Vec3& fallback) {
  if (raw.squaredNorm() == 0.0) return fallback;
  return device::project_spherical(raw, radius);
}

}  // namespace

Vec3 axle_rate(const dynamics::RigidBodyState& state) {
  const Vec3 axle = dynamics::axle_direction(state.orientation);
  const Vec3 omega_world = state.orientation * state.omega_body;
  return omega_world - omega_world.dot(axle) * axle;
}

std::optional<Command> commanded_axle(const ServoInput& input, const CouplingMap& map,
                                      const Vec3& fallback_axle) {
  if (!input.a && !input.b) return std::nullopt;
  const double rho = map.sphere_radius_m;
  const Vec3 fallback = rho * fallback_axle;

  // Ends of the virtual axle in the A frame. A missing hand is replaced by
  // the rigid image of the other.
  Vec3 end_a, end_b, vel_a, vel_b;
  if (input.a) {
    end_a = constrained_or(input.a->position, rho, fallback);
    vel_a = input.a->velocity;
  }
  if (input.b) {
    end_b = to_partner_frame(constrained_or(input.b->position, rho, couple(fallback, map)), map);
    vel_b = to_partner_frame(input.b->velocity, map);
  }
  if (!input.a) {
    end_a = -end_b;
    vel_a = -vel_b;
  }
  if (!input.b) {
    end_b = -end_a;
    vel_b = -vel_a;
  }

  const Vec3 d = end_a - end_b;
  const double length = d.norm();
  if (!(length > 0.0)) {
    throw Error(ErrorCode::kDegenerateAxle, "axle ends coincide");
  }
  const Vec3 axle = d / length;
  return Command{axle, axle.cross(vel_a - vel_b) / length};
}

ServoOutput servo_tick(const ServoInput& input, const dynamics::RigidBodyState& sim,
                       const dynamics::WheelParams& params, const dynamics::InertiaTensor& inertia,
                       const ServoConfig& config) {
  const double dt = 1.0 / config.caps.servo_rate_Hz;
  const CouplingMap& map = config.coupling;
  const double rho = map.sphere_radius_m;

  ServoOutput out;

  const Vec3 axle_before = dynamics::axle_direction(sim.orientation);
  if (const auto command = commanded_axle(input, map, axle_before)) {
    const Vec3 rate_before = axle_rate(sim);
    out.user_torque = config.hold.stiffness_Nm_rad * axle_before.cross(command->axle) +
                      config.hold.damping_Nms_rad * (command->rate - rate_before);
  }

  out.state = dynamics::step(sim, params, inertia, out.user_torque, dt);
  out.axle = dynamics::axle_direction(out.state.orientation);
  out.axle_rate = axle_rate(out.state);
  out.angular_momentum =
      dynamics::angular_momentum(inertia, out.state.omega_body, out.state.orientation);
  out.gravity_torque = dynamics::gravity_torque(params, out.state.orientation);

  // Effective frames: engaged devices report what the hand does, the others
  // ride along with the simulated axle.
  const Vec3 tip = rho * out.axle;
  const Vec3 tip_velocity = rho * out.axle_rate.cross(out.axle);
  const HapticFrame virtual_a{tip, tip_velocity, out.state.tick, dt};
  const HapticFrame virtual_b{couple(tip, map), couple(tip_velocity, map), out.state.tick, dt};
  out.frame_a = input.a.value_or(virtual_a);
  out.frame_b = input.b.value_or(virtual_b);

  Vec3 force_a = Vec3::Zero();
  if (params.handle_length_m > 0.0) {
    force_a = config.feel_gain * gyroscopic_resistance(out.angular_momentum, out.axle_rate,
                                                       out.axle, params.handle_length_m);
  }
  // The B end carries the opposite force in the A frame.
  Vec3 force_b = couple(force_a, map);

  if (config.stabilizer.enabled) {
    const Spring spring_a{tip, config.stabilizer.stiffness_N_m, config.stabilizer.damping_N_s_m};
    const Spring spring_b{couple(tip, map), config.stabilizer.stiffness_N_m,
                          config.stabilizer.damping_N_s_m};
    force_a += eval_spring(spring_a, out.frame_a);
    force_b += eval_spring(spring_b, out.frame_b);
  }

  if (input.a && input.b) {
    const auto [correction_a, correction_b] =
        device::coupling_correction({out.frame_a.position, out.frame_a.velocity, out.state.tick},
                                    {out.frame_b.position, out.frame_b.velocity, out.state.tick},
                                    map);
    force_a += correction_a;
    force_b += correction_b;
  }

  force_a += compose(config.effects, out.frame_a);
  force_b += compose(config.effects, out.frame_b);

  out.raw_force_a = force_a;
  out.raw_force_b = force_b;
  out.force_a = clamp_force(force_a, config.caps);
  out.force_b = clamp_force(force_b, config.caps);
  return out;
}

}  // namespace gyrolab::haptics
