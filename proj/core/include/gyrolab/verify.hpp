#pragma once

// Physics self-checks run by `gyrolab verify` against a config's wheel.

#include <string>
#include <vector>

#include "gyrolab/config.hpp"

namespace gyrolab::verify {

enum class Status { kPass, kFail, kSkipped };

const char* to_string(Status status);

struct CheckResult {
  std::string name;
  Status status = Status::kPass;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Report {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Tolerances for each check.
inline constexpr double kPrecessionPeriodRelTol = 0.02;
inline constexpr double kConservationRelTol = 1e-8;
inline constexpr double kNutationRelTol = 0.05;
inline constexpr std::int64_t kConservationSteps = 10'000;

/// Free heavy top from the configured initial tilt: time for the axle
/// azimuth to sweep 2 pi against 2 pi / precession_rate.
CheckResult precession_period(const SessionConfig& config);

/// Torque-free run of the configured inertia with a generic body rate:
/// worst relative drift of |L| and kinetic energy over 10^4 steps.
CheckResult conservation(const SessionConfig& config);

/// Dominant frequency of the tilt oscillation after a small transverse kick
/// against the fast-top estimate I_s w / I_t.
CheckResult nutation(const SessionConfig& config);

/// Runs the configured session and checks every emitted force against the
/// device cap, and every clamped force against its pre-clamp direction.
CheckResult max_force(const SessionConfig& config, double duration_s = 10.0);

Report run_all(const SessionConfig& config);

}  // namespace gyrolab::verify
