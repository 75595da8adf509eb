#pragma once

// Rigid-body model of a symmetric wheel spinning on a pivoted handle.
//
// Conventions, fixed throughout the library:
//   * world +z is up, gravity acts along -z;
//   * the pivot sits at the world origin;
//   * the axle is the body +z axis, the wheel centre sits at
//     handle_length * axle;
//   * a positive spin rate is counter-clockwise seen from the +axle end, so
//     the spin angular momentum points along +axle (right-hand rule).

#include <cstdint>
#include <variant>

#include "gyrolab/vec.hpp"

namespace gyrolab::dynamics {

/// Principal moments about the pivot, body axes (x, y, z). A symmetric top
/// has transverse() == x == y and spin() == z.
struct InertiaTensor {
  Vec3 principal{1.0, 1.0, 1.0};

  double transverse() const { return principal.x(); }
  double spin() const { return principal.z(); }

  /// Throws InvalidParameter when a moment is non-positive or the triangle
  /// inequality is violated.
  void validate() const;
};

enum class InertiaShape { kHoop, kDisk };

/// Either a named shape or an explicit tensor about the pivot.
using InertiaModel = std::variant<InertiaShape, InertiaTensor>;

struct WheelParams {
  double mass_kg = 1.5;
  double wheel_radius_m = 0.2921;  // 23 in inner diameter bicycle wheel
  double handle_length_m = 0.15;
  double spin_rate_rad_s = 30.0;
  InertiaModel inertia_model = InertiaShape::kHoop;
  double gravity_m_s2 = 9.81;

  void validate() const;
};

bool operator==(const InertiaTensor& a, const InertiaTensor& b);
bool operator==(const WheelParams& a, const WheelParams& b);

struct RigidBodyState {
  Quat orientation = Quat::Identity();  // body -> world
  Vec3 omega_body = Vec3::Zero();       // rad/s
  std::int64_t tick = 0;
  double t = 0.0;  // always tick * dt
};

InertiaTensor wheel_inertia(const WheelParams& params);

/// World-frame angular momentum about the pivot.
Vec3 angular_momentum(const InertiaTensor& inertia, const Vec3& omega_body, const Quat& orientation);

/// World-frame axle direction (body +z rotated into the world).
Vec3 axle_direction(const Quat& orientation);

/// Gravity torque about the pivot, (r * axle) x (-M g z).
Vec3 gravity_torque(const WheelParams& params, const Quat& orientation);

/// Steady precession rate of the gyroscopic approximation, r M g / (I_s w).
/// Positive means the axle azimuth increases (counter-clockwise from above).
/// Throws kUndefinedPrecession when the spin rate is zero.
double precession_rate(const WheelParams& params);

/// Fast-top nutation estimate I_s w / I_t. Throws when the spin rate is zero.
double nutation_frequency(const WheelParams& params);

/// Angle between the axle and +z, in [0, pi].
double polar_angle(const Quat& orientation);

/// Azimuth of the axle about +z, in (-pi, pi].
double azimuth(const Quat& orientation);

/// Orientation whose axle has the given polar angle and azimuth. The body is
/// tilted without twist about its own axle.
Quat orientation_from_axle(double polar, double azimuth_rad);

/// Minimal rotation taking +z onto the given unit direction.
Quat orientation_from_direction(const Vec3& axle);

double kinetic_energy(const InertiaTensor& inertia, const Vec3& omega_body);

/// Advance one fixed step of classical RK4 on Euler's rigid-body equations,
/// I w' + w x (I w) = tau_body, with the quaternion kinematics q' = q (0, w)/2.
/// Gravity is re-evaluated at every stage from `params`; `applied_torque_world`
/// (e.g. the user's hold on the handles) is held constant across the step.
/// Throws NumericalBlowup carrying the tick index on a non-finite result.
RigidBodyState step(const RigidBodyState& state, const WheelParams& params,
                    const Vec3& applied_torque_world, double dt);

/// Same as step() with a caller-supplied inertia, so hot loops can skip
/// re-deriving it from the shape model.
RigidBodyState step(const RigidBodyState& state, const WheelParams& params,
                    const InertiaTensor& inertia, const Vec3& applied_torque_world, double dt);

}  // namespace gyrolab::dynamics
