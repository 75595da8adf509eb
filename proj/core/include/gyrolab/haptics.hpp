#pragma once

// Force-effect primitives evaluated once per servo tick, plus the reaction
// force a spinning wheel exerts on the hands that reorient its axle.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "gyrolab/vec.hpp"

namespace gyrolab::haptics {

/// One servo-tick snapshot of an end-effector, in device workspace coordinates.
struct HapticFrame {
  Vec3 position = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();  // m/s
  std::int64_t tick = 0;
  double dt = 0.001;
};

/// Pulls the end-effector toward `anchor`.
struct Spring {
  Vec3 anchor = Vec3::Zero();
  double stiffness = 0.0;  // N/m
  double damping = 0.0;    // N s/m
};

/// Opposes motion.
struct Viscosity {
  double coefficient = 0.0;  // N s/m
};

/// Piecewise-linear scalar function of one coordinate. Knots are
/// (position_m, force_N) with strictly increasing positions; evaluation
/// outside the knot range holds the end value.
class PiecewiseLinear {
 public:
  using Knot = std::pair<double, double>;

  /// Throws kInvalidEffect on fewer than two knots, non-finite values or
  /// non-increasing abscissae.
  explicit PiecewiseLinear(std::vector<Knot> knots);

  double operator()(double x) const;
  const std::vector<Knot>& knots() const { return knots_; }

  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

 private:
  std::vector<Knot> knots_;
};

/// Per-axis force as a function of the matching position coordinate. An
/// empty axis contributes no force.
struct PositionFunction {
  std::optional<PiecewiseLinear> fx;
  std::optional<PiecewiseLinear> fy;
  std::optional<PiecewiseLinear> fz;
};

using ForceEffect = std::variant<Spring, Viscosity, PositionFunction>;

/// Throws kInvalidEffect on negative or non-finite coefficients.
void validate(const ForceEffect& effect);

struct DeviceCaps {
  double max_force_N = 9.0;          // 2 lbf
  double workspace_side_m = 0.1016;  // 4 in cube centred on the origin
  double servo_rate_Hz = 1000.0;

  double half_side() const { return 0.5 * workspace_side_m; }
  void validate() const;
};

Vec3 eval_spring(const Spring& effect, const HapticFrame& frame);
Vec3 eval_viscosity(const Viscosity& effect, const HapticFrame& frame);
Vec3 eval_position_function(const PositionFunction& effect, const HapticFrame& frame);
Vec3 evaluate(const ForceEffect& effect, const HapticFrame& frame);

/// Reaction of a spinning wheel against a change of axle direction.
///
/// The hands rotating the axle at `axle_rate_world` must supply
/// dL/dt = axle_rate x L; the wheel pushes back with the opposite torque.
/// Its component perpendicular to the axle is returned as a force at lever
/// arm `handle_length_m`: F = (tau_react - (tau_react . a) a) / r.
/// Throws kInvalidParameter unless handle_length_m > 0.
Vec3 gyroscopic_resistance(const Vec3& angular_momentum_world, const Vec3& axle_rate_world,
                           const Vec3& axle, double handle_length_m);

/// Same law with the axle taken along L (L = 0 gives zero force).
Vec3 gyroscopic_resistance(const Vec3& angular_momentum_world, const Vec3& axle_rate_world,
                           double handle_length_m);

/// Vector sum of precomputed effect outputs.
Vec3 compose(std::span<const Vec3> forces);

/// Sum of every effect evaluated on `frame`; empty -> zero.
Vec3 compose(std::span<const ForceEffect> effects, const HapticFrame& frame);

/// Scales `force` down to the device limit, keeping its direction.
Vec3 clamp_force(const Vec3& force, const DeviceCaps& caps);

}  // namespace gyrolab::haptics
