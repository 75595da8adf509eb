#include <benchmark/benchmark.h>

#include "gyrolab/config.hpp"
#include "gyrolab/servo.hpp"
#include "gyrolab/session.hpp"

namespace {

using namespace gyrolab;

void BM_DynamicsStep(benchmark::State& st) {
  const dynamics::WheelParams params;
  const auto inertia = dynamics::wheel_inertia(params);
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(1.2, 0.0);
  s.omega_body = Vec3(0.0, 0.0, params.spin_rate_rad_s);
  for (auto _ : st) {
    s = dynamics::step(s, params, inertia, Vec3::Zero(), 0.001);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_DynamicsStep);

void BM_ServoTickBothHands(benchmark::State& st) {
  const dynamics::WheelParams params;
  const auto inertia = dynamics::wheel_inertia(params);
  haptics::ServoConfig config;
  config.effects.push_back(haptics::Viscosity{0.5});
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(1.2, 0.3);
  s.omega_body = Vec3(0.0, 0.0, params.spin_rate_rad_s);
  haptics::ServoInput input;
  input.a = haptics::HapticFrame{Vec3(0.04, 0.02, 0.01), Vec3(0.01, 0.0, 0.0), 0, 0.001};
  input.b = haptics::HapticFrame{Vec3(0.04, -0.02, 0.01), Vec3(0.01, 0.0, 0.0), 0, 0.001};
  for (auto _ : st) {
    auto out = haptics::servo_tick(input, s, params, inertia, config);
    s = out.state;
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_ServoTickBothHands);

void BM_SessionTick(benchmark::State& st) {
  SessionConfig config;
  Session session(config);
  for (auto _ : st) benchmark::DoNotOptimize(session.tick());
}
BENCHMARK(BM_SessionTick);

void BM_ConfigHash(benchmark::State& st) {
  const SessionConfig config;
  for (auto _ : st) benchmark::DoNotOptimize(config_hash(config));
}
BENCHMARK(BM_ConfigHash);

}  // namespace
BENCHMARK_MAIN();
