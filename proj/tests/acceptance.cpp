// Acceptance suite: one PASS/FAIL line per criterion, exit code 0 only when
// every criterion passes. Oracles are computed here, independently of the
// library's own closed forms.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gyrolab/commands.hpp"
#include "gyrolab/server.hpp"
#include "gyrolab/session.hpp"
#include "gyrolab/trace.hpp"
#include "message_gen.hpp"
#include "support.hpp"
#include "ws_client.hpp"

namespace gyrolab {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kG = 9.81;
const fs::path kConfigs = fs::path(GYROLAB_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

Outcome gravity_oracle() {
  test::Rng rng(1001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    dynamics::WheelParams p;
    p.handle_length_m = rng.uniform(0.01, 1.0);
    p.mass_kg = rng.uniform(0.1, 10.0);
    const double theta = rng.uniform(0.01, std::numbers::pi - 0.01);
    const double phi = rng.uniform(0.0, kTwoPi);
    const Vec3 tau = dynamics::gravity_torque(p, dynamics::orientation_from_axle(theta, phi));
    const double expected = p.handle_length_m * p.mass_kg * kG * std::sin(theta);
    worst = std::max(worst, std::abs(tau.norm() - expected) / expected);
  }
  const double wall = seconds_since(t0);
  return {worst <= 1e-12 && wall < 1.0,
          format("1000 triples, worst relative error %.3g (limit 1e-12), %.3g s (limit 1 s)", worst, wall)};
}

struct FreeRun {
  double drift = 0.0;
  Vec3 final_l = Vec3::Zero();
};

FreeRun free_spin(double dt, double span_s) {
  dynamics::WheelParams p;
  p.handle_length_m = 0.0;  // no moment arm: torque-free
  const dynamics::InertiaTensor inertia{Vec3(0.07, 0.09, 0.128)};
  p.inertia_model = inertia;
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(0.7, 0.4);
  s.omega_body = Vec3(0.4, -0.25, 30.0);
  const double l0 = dynamics::angular_momentum(inertia, s.omega_body, s.orientation).norm();
  const double e0 = dynamics::kinetic_energy(inertia, s.omega_body);
  const auto steps = static_cast<std::int64_t>(std::llround(span_s / dt));
  FreeRun run;
  for (std::int64_t i = 0; i < steps; ++i) {
    s = dynamics::step(s, p, inertia, Vec3::Zero(), dt);
    const double l = dynamics::angular_momentum(inertia, s.omega_body, s.orientation).norm();
    const double e = dynamics::kinetic_energy(inertia, s.omega_body);
    run.drift = std::max({run.drift, std::abs(l - l0) / l0, std::abs(e - e0) / e0});
  }
  run.final_l = dynamics::angular_momentum(inertia, s.omega_body, s.orientation);
  return run;
}

Outcome conservation() {
  const FreeRun coarse = free_spin(1e-3, 10.0);
  const FreeRun reference = free_spin(1e-6, 10.0);
  const double l_gap = (coarse.final_l - reference.final_l).norm() / reference.final_l.norm();
  return {coarse.drift < 1e-8 && l_gap < 1e-8,
          format("1e4 steps at 1 ms: max drift of |L| and energy %.3g (limit 1e-8); "
                 "L_world vs 1 us reference %.3g (reference drift %.3g)",
                 coarse.drift, l_gap, reference.drift)};
}

// Hoop wheel released from a horizontal axle.
dynamics::WheelParams reference_wheel() {
  dynamics::WheelParams p;
  p.mass_kg = 1.5;
  p.wheel_radius_m = 0.2921;
  p.handle_length_m = 0.15;
  p.spin_rate_rad_s = 60.0;
  p.inertia_model = dynamics::InertiaShape::kHoop;
  return p;
}

dynamics::RigidBodyState released(const dynamics::WheelParams& p) {
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(std::numbers::pi / 2, 0.0);
  s.omega_body = Vec3(0.0, 0.0, p.spin_rate_rad_s);
  return s;
}

Outcome precession() {
  const auto p = reference_wheel();
  const double i_spin = p.mass_kg * p.wheel_radius_m * p.wheel_radius_m;
  const double expected = kTwoPi * i_spin * p.spin_rate_rad_s / (p.handle_length_m * p.mass_kg * kG);
  const auto inertia = dynamics::wheel_inertia(p);
  const double dt = 1e-3;
  auto s = released(p);
  double swept = 0.0;
  double previous = 0.0;
  double period = -1.0;
  const auto t0 = Clock::now();
  while (s.t < 30.0) {
    s = dynamics::step(s, p, inertia, Vec3::Zero(), dt);
    const Vec3 a = dynamics::axle_direction(s.orientation);
    const double az = std::atan2(a.y(), a.x());
    double d = az - previous;
    if (d > std::numbers::pi) d -= kTwoPi;
    if (d < -std::numbers::pi) d += kTwoPi;
    const double before = std::abs(swept);
    swept += d;
    previous = az;
    if (std::abs(swept) >= kTwoPi) {
      period = s.t - dt + dt * (kTwoPi - before) / (std::abs(swept) - before);
      break;
    }
  }
  const double wall = seconds_since(t0);
  const double speed = s.t / wall;
  const double err = std::abs(period - expected) / expected;
  return {period > 0 && err <= 0.02 && speed >= 10.0,
          format("measured %.5g s, oracle %.5g s, relative error %.3g (limit 0.02), %.0fx real time (limit 10x)",
                 period, expected, err, speed)};
}

Outcome nutation() {
  const auto p = reference_wheel();
  const double m = p.mass_kg, rw = p.wheel_radius_m, r = p.handle_length_m;
  const double expected = (m * rw * rw) * p.spin_rate_rad_s / (0.5 * m * rw * rw + m * r * r);
  const auto inertia = dynamics::wheel_inertia(p);
  const double dt = 1e-3;
  auto s = released(p);
  s.omega_body.x() += 0.6;  // small transverse kick
  std::vector<double> theta;
  for (int i = 0; i < 4000; ++i) {
    s = dynamics::step(s, p, inertia, Vec3::Zero(), dt);
    theta.push_back(std::acos(std::clamp(dynamics::axle_direction(s.orientation).z(), -1.0, 1.0)));
  }
  double mean = 0.0;
  for (double v : theta) mean += v;
  mean /= static_cast<double>(theta.size());
  std::vector<double> crossings;
  for (std::size_t i = 1; i < theta.size(); ++i) {
    const double a = theta[i - 1] - mean, b = theta[i] - mean;
    if ((a < 0) != (b < 0)) crossings.push_back((static_cast<double>(i) + a / (a - b)) * dt);
  }
  if (crossings.size() < 3) return {false, "no tilt oscillation"};
  const double measured =
      std::numbers::pi * static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
  const double err = std::abs(measured - expected) / expected;
  return {err <= 0.05, format("measured %.5g rad/s, oracle %.5g rad/s, relative error %.3g (limit 0.05)",
                              measured, expected, err)};
}

struct CapTally {
  double worst_force = 0.0;
  double worst_direction = 0.0;
  std::size_t clamped = 0;
  std::size_t samples = 0;
  std::size_t rows = 0;
  double worst_row_force = 0.0;
};

void check_output(const haptics::ServoOutput& out, CapTally& t) {
  for (const auto& [raw, sent] : {std::pair{out.raw_force_a, out.force_a}, std::pair{out.raw_force_b, out.force_b}}) {
    ++t.samples;
    t.worst_force = std::max(t.worst_force, sent.norm());
    if (raw != sent) {
      ++t.clamped;
      const double along = sent.dot(raw);
      const double direction = along > 0 ? (sent.normalized() - raw.normalized()).norm() : 2.0;
      t.worst_direction = std::max(t.worst_direction, direction);
    }
  }
}

// Ticks the session, writing every record to `path`; `drive` stages inputs.
void run_trace(SessionConfig config, std::int64_t ticks, const fs::path& path, CapTally& t,
               const std::function<void(Session&, std::int64_t)>& drive = {}) {
  Session session(std::move(config));
  {
    std::ofstream out(path, std::ios::binary);
    trace::TraceWriter writer(out);
    for (std::int64_t i = 0; i < ticks; ++i) {
      if (drive) drive(session, i);
      if (auto rec = session.tick()) writer.write(*rec);
      check_output(*session.last_output(), t);
    }
  }
  for (const auto& row : trace::read_trace(path).rows) {
    ++t.rows;
    t.worst_row_force = std::max({t.worst_row_force, row.record.snapshot.force_a.norm(),
                                  row.record.snapshot.force_b.norm()});
  }
}

Outcome force_cap() {
  const auto dir = test::scratch_dir("acceptance-cap");
  CapTally t;
  run_trace(load_config(kConfigs / "default.json"), 10'000, dir / "default.csv", t);
  run_trace(load_config(kConfigs / "scripted_drag.json"), 10'000, dir / "drag.csv", t);
  run_trace(load_config(kConfigs / "reference_wheel.json"), 10'000, dir / "reference.csv", t);

  auto heavy = load_config(kConfigs / "scripted_drag.json");
  heavy.wheel.spin_rate_rad_s = 200.0;
  heavy.servo.feel_gain = 20.0;
  run_trace(heavy, 10'000, dir / "heavy.csv", t);

  // A hand yanking device A around the sphere.
  SessionConfig hand;
  hand.device_a.kind = DeviceSpec::Kind::kInteractive;
  hand.device_b.kind = DeviceSpec::Kind::kInteractive;
  test::Rng rng(1005);
  run_trace(hand, 10'000, dir / "hand.csv", t, [&](Session& s, std::int64_t i) {
    if (i % 40 == 0) s.stage_pointer(device::DeviceId::kA, 0.0508 * rng.unit());
    if (i % 55 == 0) s.stage_pointer(device::DeviceId::kB, 0.0508 * rng.unit());
  });

  const double cap = 9.0;
  const bool pass = t.worst_force <= cap && t.worst_row_force <= cap && t.worst_direction <= 1e-12 &&
                    t.clamped > 0;
  return {pass, format("%zu force samples and %zu trace rows, max |F| %.6g N (cap 9 N), %zu clamped, "
                       "worst clamp direction error %.3g (limit 1e-12)",
                       t.samples, t.rows, std::max(t.worst_force, t.worst_row_force), t.clamped,
                       t.worst_direction)};
}

Outcome servo_budget() {
  const auto p = dynamics::WheelParams{};
  const auto inertia = dynamics::wheel_inertia(p);
  haptics::ServoConfig config;
  config.effects.push_back(haptics::Viscosity{0.5});
  dynamics::RigidBodyState s;
  s.orientation = dynamics::orientation_from_axle(1.2, 0.3);
  s.omega_body = Vec3(0.0, 0.0, p.spin_rate_rad_s);
  const auto t0 = Clock::now();
  for (int i = 0; i < 10'000; ++i) {
    const double a = 1e-3 * i;
    haptics::ServoInput input;
    const Vec3 pa = 0.0508 * Vec3(std::cos(a), std::sin(a), 0.1).normalized();
    input.a = haptics::HapticFrame{pa, Vec3(-std::sin(a), std::cos(a), 0.0) * 0.05, i, 1e-3};
    input.b = haptics::HapticFrame{device::couple(pa, config.coupling), Vec3::Zero(), i, 1e-3};
    s = haptics::servo_tick(input, s, p, inertia, config).state;
  }
  const double wall = seconds_since(t0);
  return {wall < 1.0, format("10000 servo ticks with both hands in %.3g s (limit 1 s)", wall)};
}

Outcome determinism() {
  const auto dir = test::scratch_dir("acceptance-determinism");
  const auto cfg = (kConfigs / "scripted_drag.json").string();
  std::ostringstream out, err;
  const int a = cli::cmd_run(cfg, 10.0, (dir / "a.csv").string(), out, err);
  const int b = cli::cmd_run(cfg, 10.0, (dir / "b.csv").string(), out, err);
  if (a != 0 || b != 0) return {false, "run failed: " + err.str()};
  const auto ha = test::sha256_file(dir / "a.csv");
  const auto hb = test::sha256_file(dir / "b.csv");
  std::ostringstream replay_out;
  const int rc = cli::cmd_replay((dir / "a.csv").string(), replay_out, err);
  std::string line = replay_out.str();
  if (!line.empty() && line.back() == '\n') line.pop_back();
  const bool identical = rc == 0 && line.rfind("identical", 0) == 0;
  return {ha == hb && identical,
          format("trace sha256 %s %s %.16s..., replay: %s", ha.substr(0, 16).c_str(),
                 ha == hb ? "==" : "!=", hb.c_str(), line.c_str())};
}

Outcome effect_properties() {
  test::Rng rng(1008);
  constexpr int kCases = 10'000;
  int viscosity = 0, spring = 0, involution = 0, projection = 0, permutation = 0;
  for (int i = 0; i < kCases; ++i) {
    haptics::HapticFrame f;
    f.position = rng.vec(-0.06, 0.06);
    f.velocity = rng.vec(-2.0, 2.0);

    const haptics::Viscosity v{rng.uniform(0.0, 20.0)};
    if (haptics::eval_viscosity(v, f).dot(f.velocity) <= 0.0) ++viscosity;

    const haptics::Spring s{rng.vec(-0.06, 0.06), rng.uniform(0.0, 500.0), 0.0};
    const Vec3 fs_ = haptics::eval_spring(s, f);
    const Vec3 to_anchor = s.anchor - f.position;
    if (fs_.dot(to_anchor) >= 0.0 && fs_.cross(to_anchor).norm() <= 1e-12 * (fs_.norm() * to_anchor.norm() + 1e-300))
      ++spring;

    device::CouplingMap map;
    map.mirrored = {rng.coin(), rng.coin(), rng.coin()};
    const Vec3 x = rng.vec(-10.0, 10.0);
    const Vec3 cx = device::couple(x, map);
    if (device::couple(cx, map) == x && cx.norm() == x.norm()) ++involution;

    const double radius = rng.uniform(0.01, 0.1);
    const Vec3 raw = rng.vec(-1.0, 1.0);
    if (raw.norm() > 0 && std::abs(device::project_spherical(raw, radius).norm() - radius) < 1e-12) ++projection;

    std::vector<Vec3> forces(static_cast<std::size_t>(rng.integer(1, 8)));
    double scale = 0.0;
    for (auto& g : forces) {
      g = rng.vec(-9.0, 9.0);
      scale += g.norm();
    }
    const Vec3 before = haptics::compose(forces);
    std::shuffle(forces.begin(), forces.end(), rng.engine());
    if ((haptics::compose(forces) - before).norm() <= 1e-12 * std::max(scale, 1.0)) ++permutation;
  }
  const bool pass = viscosity == kCases && spring == kCases && involution == kCases && projection == kCases &&
                    permutation == kCases;
  return {pass, format("of %d cases each: viscosity F.v<=0 %d, spring toward anchor %d, couple involution %d, "
                       "spherical projection %d, compose permutation %d",
                       kCases, viscosity, spring, involution, projection, permutation)};
}

Outcome protocol() {
  test::Rng rng(1009);
  int round_trips = 0;
  for (int i = 0; i < 10'000; ++i) {
    const auto c = test::random_client(rng);
    if (gateway::parse_client(gateway::serialize(c)) == c) ++round_trips;
    const auto s = test::random_server(rng);
    if (gateway::parse_server(gateway::serialize(s)) == s) ++round_trips;
  }

  gateway::Server server(gateway::ServerOptions{});
  server.start();
  test::WsClient client(server.port());
  client.read_until<gateway::Hello>();
  const std::vector<std::string> malformed = {
      "", "{", "[]", "null", R"({"type":"Start"})", R"({"type":"Start","protocol_version":2,"ref":1})",
      R"({"type":"Teleport","protocol_version":1,"ref":1})", R"({"type":"SetParams","protocol_version":1,"ref":"x"})",
      R"({"type":"SetParams","protocol_version":1,"ref":1,"mass_kg":-3})",
      R"({"type":"Pointer","protocol_version":1,"ref":1,"device":"A","position":[1,2]})",
      R"({"type":"LoadPreset","protocol_version":1,"ref":1,"name":"nope"})"};
  int errors = 0;
  for (const auto& frame : malformed) {
    client.send(frame);
    client.read_until<gateway::ErrorReply>();
    ++errors;
  }
  client.send(gateway::Start{42});
  const bool alive = client.read_until<gateway::Ack>().ref == 42;
  return {round_trips == 20'000 && errors == static_cast<int>(malformed.size()) && alive,
          format("%d/20000 messages round-trip equal; %d/%zu malformed frames answered with Error; "
                 "connection %s",
                 round_trips, errors, malformed.size(), alive ? "still open (Start acknowledged)" : "lost")};
}

}  // namespace
}  // namespace gyrolab

int main() {
  using namespace gyrolab;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"gravity_torque_oracle", gravity_oracle}, {"conservation", conservation},
      {"precession_period", precession},         {"nutation_frequency", nutation},
      {"force_cap", force_cap},                  {"servo_budget", servo_budget},
      {"determinism", determinism},              {"effect_properties", effect_properties},
      {"protocol", protocol},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s  %s  %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
