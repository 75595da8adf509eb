#include "gyrolab/haptics.hpp"

#include <algorithm>
#include <cmath>

#include "gyrolab/error.hpp"

namespace gyrolab::haptics {
namespace {

void require_effect(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidEffect, what);
}

bool nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

PiecewiseLinear::PiecewiseLinear(std::vector<Knot> knots) : knots_(std::move(knots)) {
  require_effect(knots_.size() >= 2, "position function needs at least two knots");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require_effect(std::isfinite(knots_[i].first) && std::isfinite(knots_[i].second),
                   "position function knots must be finite");
    if (i > 0) {
      require_effect(knots_[i].first > knots_[i - 1].first,
                     "position function knots must have strictly increasing positions");
    }
  }
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= knots_.front().first) return knots_.front().second;
  if (x >= knots_.back().first) return knots_.back().second;
  const auto upper = std::upper_bound(knots_.begin(), knots_.end(), x,
                                      [](double v, const Knot& k) { return v < k.first; });
  const auto& [x1, y1] = *upper;
  const auto& [x0, y0] = *(upper - 1);
  const double u = (x - x0) / (x1 - x0);
  return y0 + u * (y1 - y0);
}

void validate(const ForceEffect& effect) {
  std::visit(
      [](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Spring>) {
          require_effect(e.anchor.allFinite(), "spring anchor must be finite");
          require_effect(nonnegative(e.stiffness), "spring stiffness must be non-negative");
          require_effect(nonnegative(e.damping), "spring damping must be non-negative");
        } else if constexpr (std::is_same_v<T, Viscosity>) {
          require_effect(nonnegative(e.coefficient), "viscosity coefficient must be non-negative");
        }
        // PiecewiseLinear validates itself on construction.
      },
      effect);
}

void DeviceCaps::validate() const {
  if (!(std::isfinite(max_force_N) && max_force_N > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "max_force_N must be positive");
  }
  if (!(std::isfinite(servo_rate_Hz) && servo_rate_Hz > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "servo_rate_Hz must be positive");
  }
  if (!(std::isfinite(workspace_side_m) && workspace_side_m > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "workspace_side_m must be positive");
  }
}

Vec3 eval_spring(const Spring& effect, const HapticFrame& frame) {
  return effect.stiffness * (effect.anchor - frame.position) - effect.damping * frame.velocity;
}

Vec3 eval_viscosity(const Viscosity& effect, const HapticFrame& frame) {
  return -effect.coefficient * frame.velocity;
}

Vec3 eval_position_function(const PositionFunction& effect, const HapticFrame& frame) {
  const auto axis = [](const std::optional<PiecewiseLinear>& f, double x) {
    return f ? (*f)(x) : 0.0;
  };
  return {axis(effect.fx, frame.position.x()), axis(effect.fy, frame.position.y()),
          axis(effect.fz, frame.position.z())};
}

Vec3 evaluate(const ForceEffect& effect, const HapticFrame& frame) {
  return std::visit(
      [&frame](const auto& e) -> Vec3 {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, Spring>) return eval_spring(e, frame);
        else if constexpr (std::is_same_v<T, Viscosity>) return eval_viscosity(e, frame);
        else return eval_position_function(e, frame);
      },
      effect);
}

Vec3 gyroscopic_resistance(const Vec3& angular_momentum_world, const Vec3& axle_rate_world,
                           const Vec3& axle, double handle_length_m) {
  if (!(std::isfinite(handle_length_m) && handle_length_m > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "gyroscopic resistance needs a positive handle length");
  }
  const Vec3 reaction = -axle_rate_world.cross(angular_momentum_world);
  const double n = axle.norm();
  const Vec3 perpendicular = n > 0 ? reaction - reaction.dot(axle / n) * (axle / n) : reaction;
  return perpendicular / handle_length_m;
}

Vec3 gyroscopic_resistance(const Vec3& angular_momentum_world, const Vec3& axle_rate_world,
                           double handle_length_m) {
  return gyroscopic_resistance(angular_momentum_world, axle_rate_world, angular_momentum_world,
                               handle_length_m);
}

Vec3 compose(std::span<const Vec3> forces) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& f : forces) sum += f;
  return sum;
}

Vec3 compose(std::span<const ForceEffect> effects, const HapticFrame& frame) {
  Vec3 sum = Vec3::Zero();
  for (const ForceEffect& e : effects) sum += evaluate(e, frame);
  return sum;
}

Vec3 clamp_force(const Vec3& force, const DeviceCaps& caps) {
  const double magnitude = force.norm();
  if (magnitude <= caps.max_force_N) return force;
  Vec3 clamped = force * (caps.max_force_N / magnitude);
  // Rounding can leave the norm one ulp above the cap; shrink until it is not.
  while (clamped.norm() > caps.max_force_N) {
    clamped *= std::nextafter(1.0, 0.0);
  }
  return clamped;
}

}  // namespace gyrolab::haptics
