#include "gyrolab/dynamics.hpp"

#include <array>
#include <cmath>
#include <string>

#include "gyrolab/error.hpp"

namespace gyrolab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidParameter: return "invalid_params";
    case ErrorCode::kUndefinedPrecession: return "undefined_precession";
    case ErrorCode::kNumericalBlowup: return "numerical_blowup";
    case ErrorCode::kDegenerateAxle: return "degenerate_axle";
    case ErrorCode::kUndefinedProjection: return "undefined_projection";
    case ErrorCode::kInvalidEffect: return "invalid_effect";
    case ErrorCode::kCalibration: return "calibration";
    case ErrorCode::kInvalidSource: return "invalid_source";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfigMismatch: return "config_mismatch";
    case ErrorCode::kHalted: return "halted";
    case ErrorCode::kService: return "service";
  }
  return "unknown";
}

namespace dynamics {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidParameter, what);
}

// Quaternion stored as (w, x, y, z); kept separate from Eigen's (x, y, z, w)
// coefficient order so the RK4 arithmetic is spelled out in one place.
using Q4 = std::array<double, 4>;

Q4 to_q4(const Quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }
Quat from_q4(const Q4& q) { return Quat(q[0], q[1], q[2], q[3]); }

// dq/dt = 1/2 q (0, w)
Q4 quat_rate(const Q4& q, const Vec3& w) {
  return {
      0.5 * (-q[1] * w.x() - q[2] * w.y() - q[3] * w.z()),
      0.5 * (q[0] * w.x() + q[2] * w.z() - q[3] * w.y()),
      0.5 * (q[0] * w.y() + q[3] * w.x() - q[1] * w.z()),
      0.5 * (q[0] * w.z() + q[1] * w.y() - q[2] * w.x()),
  };
}

Q4 normalized(const Q4& q) {
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  return {q[0] / n, q[1] / n, q[2] / n, q[3] / n};
}

// Rotation matrix rows/columns of a unit quaternion.
Vec3 rotate(const Q4& q, const Vec3& v) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  const double r00 = 1 - 2 * (y * y + z * z), r01 = 2 * (x * y - w * z), r02 = 2 * (x * z + w * y);
  const double r10 = 2 * (x * y + w * z), r11 = 1 - 2 * (x * x + z * z), r12 = 2 * (y * z - w * x);
  const double r20 = 2 * (x * z - w * y), r21 = 2 * (y * z + w * x), r22 = 1 - 2 * (x * x + y * y);
  return {r00 * v.x() + r01 * v.y() + r02 * v.z(), r10 * v.x() + r11 * v.y() + r12 * v.z(),
          r20 * v.x() + r21 * v.y() + r22 * v.z()};
}

Vec3 rotate_inverse(const Q4& q, const Vec3& v) { return rotate({q[0], -q[1], -q[2], -q[3]}, v); }

Vec3 axle_of(const Q4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)};
}

Vec3 gravity_torque_for_axle(const WheelParams& p, const Vec3& axle) {
  // (r a) x (-M g z) = r M g (-a_y, a_x, 0)
  const double k = p.handle_length_m * p.mass_kg * p.gravity_m_s2;
  return {-k * axle.y(), k * axle.x(), 0.0};
}

struct Derivative {
  Q4 dq;
  Vec3 dw;
};

Derivative derivative(const Q4& q, const Vec3& w, const WheelParams& params,
                      const InertiaTensor& inertia, const Vec3& applied_world) {
  const Q4 qn = normalized(q);
  const Vec3 torque_world = gravity_torque_for_axle(params, axle_of(qn)) + applied_world;
  const Vec3 torque_body = rotate_inverse(qn, torque_world);
  const Vec3& I = inertia.principal;
  const Vec3 Iw = I.cwiseProduct(w);
  const Vec3 dw = (torque_body - w.cross(Iw)).cwiseQuotient(I);
  return {quat_rate(q, w), dw};
}

Q4 axpy(const Q4& q, double a, const Q4& d) {
  return {q[0] + a * d[0], q[1] + a * d[1], q[2] + a * d[2], q[3] + a * d[3]};
}

}  // namespace

void InertiaTensor::validate() const {
  require(principal.allFinite(), "inertia must be finite");
  require(principal.x() > 0 && principal.y() > 0 && principal.z() > 0,
          "principal moments of inertia must be positive");
  const double a = principal.x(), b = principal.y(), c = principal.z();
  const double slack = 1e-12 * (a + b + c);
  require(a <= b + c + slack && b <= a + c + slack && c <= a + b + slack,
          "principal moments violate the triangle inequality");
}

void WheelParams::validate() const {
  require(std::isfinite(mass_kg) && mass_kg > 0, "mass_kg must be positive");
  require(std::isfinite(wheel_radius_m) && wheel_radius_m > 0, "wheel_radius_m must be positive");
  require(std::isfinite(handle_length_m) && handle_length_m >= 0,
          "handle_length_m must be non-negative");
  require(std::isfinite(spin_rate_rad_s), "spin_rate_rad_s must be finite");
  require(std::isfinite(gravity_m_s2) && gravity_m_s2 > 0, "gravity_m_s2 must be positive");
  if (const auto* explicit_tensor = std::get_if<InertiaTensor>(&inertia_model)) {
    explicit_tensor->validate();
  }
}

bool operator==(const InertiaTensor& a, const InertiaTensor& b) { return a.principal == b.principal; }

bool operator==(const WheelParams& a, const WheelParams& b) {
  return a.mass_kg == b.mass_kg && a.wheel_radius_m == b.wheel_radius_m &&
         a.handle_length_m == b.handle_length_m && a.spin_rate_rad_s == b.spin_rate_rad_s &&
         a.inertia_model == b.inertia_model && a.gravity_m_s2 == b.gravity_m_s2;
}

InertiaTensor wheel_inertia(const WheelParams& params) {
  params.validate();
  if (const auto* explicit_tensor = std::get_if<InertiaTensor>(&params.inertia_model)) {
    return *explicit_tensor;
  }
  const double M = params.mass_kg;
  const double mr2 = M * params.wheel_radius_m * params.wheel_radius_m;
  const double offset = M * params.handle_length_m * params.handle_length_m;  // parallel axis
  double spin = 0.0;
  double transverse = 0.0;
  switch (std::get<InertiaShape>(params.inertia_model)) {
    case InertiaShape::kHoop:
      spin = mr2;
      transverse = 0.5 * mr2 + offset;
      break;
    case InertiaShape::kDisk:
      spin = 0.5 * mr2;
      transverse = 0.25 * mr2 + offset;
      break;
  }
  return InertiaTensor{Vec3{transverse, transverse, spin}};
}

Vec3 angular_momentum(const InertiaTensor& inertia, const Vec3& omega_body, const Quat& orientation) {
  return rotate(to_q4(orientation), inertia.principal.cwiseProduct(omega_body));
}

Vec3 axle_direction(const Quat& orientation) { return axle_of(to_q4(orientation)); }

Vec3 gravity_torque(const WheelParams& params, const Quat& orientation) {
  return gravity_torque_for_axle(params, axle_direction(orientation));
}

double precession_rate(const WheelParams& params) {
  if (params.spin_rate_rad_s == 0.0) {
    throw Error(ErrorCode::kUndefinedPrecession, "precession rate is undefined at zero spin");
  }
  const InertiaTensor inertia = wheel_inertia(params);
  return params.handle_length_m * params.mass_kg * params.gravity_m_s2 /
         (inertia.spin() * params.spin_rate_rad_s);
}

double nutation_frequency(const WheelParams& params) {
  if (params.spin_rate_rad_s == 0.0) {
    throw Error(ErrorCode::kUndefinedPrecession, "nutation frequency is undefined at zero spin");
  }
  const InertiaTensor inertia = wheel_inertia(params);
  return std::abs(inertia.spin() * params.spin_rate_rad_s / inertia.transverse());
}

double polar_angle(const Quat& orientation) {
  const Vec3 a = axle_direction(orientation);
  return std::atan2(std::hypot(a.x(), a.y()), a.z());
}

double azimuth(const Quat& orientation) {
  const Vec3 a = axle_direction(orientation);
  return std::atan2(a.y(), a.x());
}

Quat orientation_from_axle(double polar, double azimuth_rad) {
  const double h = 0.5 * polar;
  const double s = std::sin(h);
  // rotation axis u = (-sin az, cos az, 0) takes +z to (sin p cos az, sin p sin az, cos p)
  return Quat(std::cos(h), -s * std::sin(azimuth_rad), s * std::cos(azimuth_rad), 0.0);
}

Quat orientation_from_direction(const Vec3& axle) {
  return orientation_from_axle(std::atan2(std::hypot(axle.x(), axle.y()), axle.z()),
                               std::atan2(axle.y(), axle.x()));
}

double kinetic_energy(const InertiaTensor& inertia, const Vec3& omega_body) {
  return 0.5 * omega_body.dot(inertia.principal.cwiseProduct(omega_body));
}

RigidBodyState step(const RigidBodyState& state, const WheelParams& params,
                    const Vec3& applied_torque_world, double dt) {
  return step(state, params, wheel_inertia(params), applied_torque_world, dt);
}

RigidBodyState step(const RigidBodyState& state, const WheelParams& params,
                    const InertiaTensor& inertia, const Vec3& applied_torque_world, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorCode::kInvalidParameter, "step size must be positive");
  }
  const std::int64_t next_tick = state.tick + 1;
  if (!applied_torque_world.allFinite()) {
    throw NumericalBlowup(next_tick, "applied torque is not finite");
  }

  const Q4 q0 = to_q4(state.orientation);
  const Vec3& w0 = state.omega_body;
  const double h = dt;

  const Derivative k1 = derivative(q0, w0, params, inertia, applied_torque_world);
  const Derivative k2 = derivative(axpy(q0, 0.5 * h, k1.dq), w0 + 0.5 * h * k1.dw, params, inertia,
                                   applied_torque_world);
  const Derivative k3 = derivative(axpy(q0, 0.5 * h, k2.dq), w0 + 0.5 * h * k2.dw, params, inertia,
                                   applied_torque_world);
  const Derivative k4 =
      derivative(axpy(q0, h, k3.dq), w0 + h * k3.dw, params, inertia, applied_torque_world);

  Q4 q1{};
  for (std::size_t i = 0; i < 4; ++i) {
    q1[i] = q0[i] + (h / 6.0) * (k1.dq[i] + 2.0 * k2.dq[i] + 2.0 * k3.dq[i] + k4.dq[i]);
  }
  const Vec3 w1 = w0 + (h / 6.0) * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);

  const double norm = std::sqrt(q1[0] * q1[0] + q1[1] * q1[1] + q1[2] * q1[2] + q1[3] * q1[3]);
  if (!std::isfinite(norm) || norm == 0.0 || !w1.allFinite()) {
    throw NumericalBlowup(next_tick, "non-finite rigid-body state");
  }

  RigidBodyState next;
  next.orientation = from_q4({q1[0] / norm, q1[1] / norm, q1[2] / norm, q1[3] / norm});
  next.omega_body = w1;
  next.tick = next_tick;
  next.t = static_cast<double>(next_tick) * dt;
  return next;
}

}  // namespace dynamics
}  // namespace gyrolab
