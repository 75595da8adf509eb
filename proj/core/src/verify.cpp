#include "gyrolab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gyrolab/error.hpp"
#include "gyrolab/session.hpp"

namespace gyrolab::verify {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CheckResult skipped(std::string name, std::string why) {
  CheckResult r;
  r.name = std::move(name);
  r.status = Status::kSkipped;
  r.detail = std::move(why);
  return r;
}

dynamics::RigidBodyState start_state(const SessionConfig& config) {
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(config.initial_theta_rad, config.initial_azimuth_rad);
  s.omega_body = Vec3{0.0, 0.0, config.wheel.spin_rate_rad_s};
  return s;
}

std::string describe(double measured, double expected, const char* unit) {
  std::ostringstream os;
  os.precision(6);
  os << "measured " << measured << ' ' << unit << ", expected " << expected << ' ' << unit;
  return os.str();
}

}  // namespace

const char* to_string(Status status) {
  switch (status) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kSkipped: return "SKIP";
  }
  return "?";
}

bool Report::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == Status::kFail; });
}

CheckResult precession_period(const SessionConfig& config) {
  const auto& wheel = config.wheel;
  const char* name = "precession_period";
  if (wheel.spin_rate_rad_s == 0.0) return skipped(name, "skipped (ω=0)");
  if (wheel.handle_length_m == 0.0) return skipped(name, "skipped (no gravity torque: handle_length_m=0)");
  if (std::sin(config.initial_theta_rad) < 0.05) return skipped(name, "skipped (axle near vertical)");

  const double rate = dynamics::precession_rate(wheel);
  const double ratio = std::abs(rate) / dynamics::nutation_frequency(wheel);
  if (ratio > 0.1) {
    std::ostringstream os;
    os << "skipped (slow top: precession/nutation ratio " << ratio << " > 0.1)";
    return skipped(name, os.str());
  }

  CheckResult r;
  r.name = name;
  r.expected = kTwoPi / std::abs(rate);
  r.tolerance = kPrecessionPeriodRelTol;

  const dynamics::InertiaTensor inertia = dynamics::wheel_inertia(wheel);
  const double dt = config.dt;
  const auto max_steps = static_cast<std::int64_t>(std::ceil(2.0 * r.expected / dt));
  dynamics::RigidBodyState s = start_state(config);
  double previous = dynamics::azimuth(s.orientation);
  double swept = 0.0;
  double crossing = -1.0;
  const auto wall_start = std::chrono::steady_clock::now();
  try {
    for (std::int64_t i = 0; i < max_steps; ++i) {
      s = dynamics::step(s, wheel, inertia, Vec3::Zero(), dt);
      const double az = dynamics::azimuth(s.orientation);
      double delta = az - previous;
      if (delta > std::numbers::pi) delta -= kTwoPi;
      if (delta < -std::numbers::pi) delta += kTwoPi;
      const double before = swept;
      swept += delta;
      previous = az;
      if (std::abs(swept) >= kTwoPi) {
        const double u = (kTwoPi - std::abs(before)) / (std::abs(swept) - std::abs(before));
        crossing = (static_cast<double>(s.tick - 1) + u) * dt;
        break;
      }
    }
  } catch (const NumericalBlowup& e) {
    r.status = Status::kFail;
    r.detail = e.what();
    return r;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

  if (crossing < 0.0) {
    r.status = Status::kFail;
    r.detail = "axle never completed a precession revolution";
    return r;
  }
  r.measured = crossing;
  const double error = std::abs(r.measured - r.expected) / r.expected;
  r.status = error <= r.tolerance ? Status::kPass : Status::kFail;
  std::ostringstream os;
  os << describe(r.measured, r.expected, "s") << ", relative error " << error << ", "
     << (wall > 0 ? crossing / wall : 0.0) << "x real time";
  r.detail = os.str();
  return r;
}

CheckResult conservation(const SessionConfig& config) {
  CheckResult r;
  r.name = "conservation";
  r.tolerance = kConservationRelTol;

  // Same inertia, no moment arm: nothing but the Euler coupling acts.
  dynamics::WheelParams free = config.wheel;
  free.inertia_model = dynamics::wheel_inertia(config.wheel);
  free.handle_length_m = 0.0;
  const dynamics::InertiaTensor inertia = dynamics::wheel_inertia(free);

  const double spin = config.wheel.spin_rate_rad_s != 0.0 ? config.wheel.spin_rate_rad_s : 1.0;
  dynamics::RigidBodyState s = start_state(config);
  s.omega_body = Vec3{0.4, -0.25, spin};

  const double L0 = dynamics::angular_momentum(inertia, s.omega_body, s.orientation).norm();
  const double E0 = dynamics::kinetic_energy(inertia, s.omega_body);
  double worst = 0.0;
  try {
    for (std::int64_t i = 0; i < kConservationSteps; ++i) {
      s = dynamics::step(s, free, inertia, Vec3::Zero(), config.dt);
      const double L = dynamics::angular_momentum(inertia, s.omega_body, s.orientation).norm();
      const double E = dynamics::kinetic_energy(inertia, s.omega_body);
      worst = std::max({worst, std::abs(L - L0) / L0, std::abs(E - E0) / E0});
    }
  } catch (const NumericalBlowup& e) {
    r.status = Status::kFail;
    r.detail = e.what();
    return r;
  }
  r.measured = worst;
  r.status = worst < r.tolerance ? Status::kPass : Status::kFail;
  std::ostringstream os;
  os << "max relative drift of |L| and energy " << worst << " over " << kConservationSteps
     << " steps at dt=" << config.dt << " s";
  r.detail = os.str();
  return r;
}

CheckResult nutation(const SessionConfig& config) {
  const auto& wheel = config.wheel;
  const char* name = "nutation_frequency";
  if (wheel.spin_rate_rad_s == 0.0) return skipped(name, "skipped (ω=0)");
  if (std::sin(config.initial_theta_rad) < 0.05) return skipped(name, "skipped (axle near vertical)");

  CheckResult r;
  r.name = name;
  r.expected = dynamics::nutation_frequency(wheel);
  r.tolerance = kNutationRelTol;
  const double dt = config.dt;
  if (r.expected * dt > 0.5) {
    r.status = Status::kFail;
    r.detail = "step too coarse to resolve nutation";
    return r;
  }

  const dynamics::InertiaTensor inertia = dynamics::wheel_inertia(wheel);
  dynamics::RigidBodyState s = start_state(config);
  s.omega_body.x() += 0.01 * std::abs(wheel.spin_rate_rad_s);

  const double span = 30.0 * kTwoPi / r.expected;
  const auto steps = static_cast<std::int64_t>(std::ceil(span / dt));
  std::vector<double> theta;
  theta.reserve(static_cast<std::size_t>(steps));
  try {
    for (std::int64_t i = 0; i < steps; ++i) {
      s = dynamics::step(s, wheel, inertia, Vec3::Zero(), dt);
      theta.push_back(dynamics::polar_angle(s.orientation));
    }
  } catch (const NumericalBlowup& e) {
    r.status = Status::kFail;
    r.detail = e.what();
    return r;
  }

  double mean = 0.0;
  for (double v : theta) mean += v;
  mean /= static_cast<double>(theta.size());
  std::vector<double> crossings;
  for (std::size_t i = 1; i < theta.size(); ++i) {
    const double a = theta[i - 1] - mean;
    const double b = theta[i] - mean;
    if ((a < 0.0) != (b < 0.0)) crossings.push_back((static_cast<double>(i) + a / (a - b)) * dt);
  }
  if (crossings.size() < 3) {
    r.status = Status::kFail;
    r.detail = "no tilt oscillation detected";
    return r;
  }
  r.measured = std::numbers::pi * static_cast<double>(crossings.size() - 1) /
               (crossings.back() - crossings.front());
  const double error = std::abs(r.measured - r.expected) / r.expected;
  r.status = error <= r.tolerance ? Status::kPass : Status::kFail;
  r.detail = describe(r.measured, r.expected, "rad/s");
  return r;
}

CheckResult max_force(const SessionConfig& config, double duration_s) {
  CheckResult r;
  r.name = "max_force";
  r.expected = config.servo.caps.max_force_N;
  r.tolerance = 1e-12;
  const auto ticks = static_cast<std::int64_t>(std::llround(duration_s / config.dt));
  double worst = 0.0;
  double worst_direction = 0.0;
  std::size_t clamped = 0;
  try {
    Session session(config);
    for (std::int64_t i = 0; i < ticks; ++i) {
      session.tick();
      const auto& out = *session.last_output();
      for (const auto& [raw, sent] : {std::pair{out.raw_force_a, out.force_a},
                                      std::pair{out.raw_force_b, out.force_b}}) {
        worst = std::max(worst, sent.norm());
        if (raw != sent) {
          ++clamped;
          worst_direction = std::max(worst_direction, (sent.normalized() - raw.normalized()).norm());
        }
      }
    }
  } catch (const NumericalBlowup& e) {
    r.status = Status::kFail;
    r.detail = e.what();
    return r;
  }
  r.measured = worst;
  r.status = worst <= r.expected && worst_direction <= r.tolerance ? Status::kPass : Status::kFail;
  std::ostringstream os;
  os << "max |F| " << worst << " N (cap " << r.expected << " N), " << clamped
     << " clamped samples, worst direction error " << worst_direction;
  r.detail = os.str();
  return r;
}

Report run_all(const SessionConfig& config) {
  return Report{{precession_period(config), conservation(config), nutation(config), max_force(config)}};
}

}  // namespace gyrolab::verify
