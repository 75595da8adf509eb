#pragma once

// Random protocol messages for round-trip properties.

#include "gyrolab/config.hpp"
#include "gyrolab/protocol.hpp"
#include "support.hpp"

namespace gyrolab::test {

inline double any_double(Rng& rng) {
  switch (rng.integer(0, 3)) {
    case 0: return rng.uniform(-1, 1);
    case 1: return rng.uniform(-1e6, 1e6);
    case 2: return rng.uniform(-1, 1) * std::pow(10.0, rng.uniform(-300, 300));
    default: return double(rng.integer(-1000, 1000));
  }
}

inline Vec3 any_vec(Rng& rng) { return Vec3(any_double(rng), any_double(rng), any_double(rng)); }

inline std::optional<double> maybe(Rng& rng) {
  if (rng.coin()) return std::nullopt;
  return any_double(rng);
}

inline gateway::ClientMessage random_client(Rng& rng) {
  using namespace gateway;
  const std::int64_t ref = rng.integer(-(std::int64_t{1} << 53), std::int64_t{1} << 53);
  switch (rng.integer(0, 5)) {
    case 0: {
      SetParams m;
      m.ref = ref;
      m.mass_kg = maybe(rng);
      m.wheel_radius_m = maybe(rng);
      m.handle_length_m = maybe(rng);
      m.spin_rate_rad_s = maybe(rng);
      m.gravity_m_s2 = maybe(rng);
      switch (rng.integer(0, 3)) {
        case 0: break;
        case 1: m.inertia_model = dynamics::InertiaShape::kHoop; break;
        case 2: m.inertia_model = dynamics::InertiaShape::kDisk; break;
        default: {
          const double t = rng.uniform(0.05, 1.0);
          m.inertia_model = dynamics::InertiaTensor{Vec3(t, t, rng.uniform(0.05, 2 * t))};
        }
      }
      return m;
    }
    case 1: {
      Pointer m;
      m.ref = ref;
      m.device = rng.coin() ? device::DeviceId::kA : device::DeviceId::kB;
      m.position = any_vec(rng);
      if (rng.coin()) m.tick_hint = rng.integer(0, std::int64_t{1} << 40);
      return m;
    }
    case 2: return Start{ref};
    case 3: return Pause{ref};
    case 4: return Reset{ref};
    default: {
      static const char* names[] = {"default", "reference_wheel", "heavy_wheel", "x", "", "ünïcode \"quoted\""};
      return LoadPreset{ref, names[rng.integer(0, 5)]};
    }
  }
}

inline gateway::ServerMessage random_server(Rng& rng) {
  using namespace gateway;
  switch (rng.integer(0, 3)) {
    case 0: {
      Snapshot m;
      auto& s = m.state;
      s.tick = rng.integer(0, std::int64_t{1} << 50);
      s.t = any_double(rng);
      s.axle = rng.unit();
      s.theta = rng.uniform(0, 3.14159);
      s.wheel_phase = rng.uniform(0, 6.28318);
      s.angular_momentum = any_vec(rng);
      s.torque = any_vec(rng);
      s.force_a = any_vec(rng);
      s.force_b = any_vec(rng);
      s.omega = any_double(rng);
      return m;
    }
    case 1: return Ack{rng.integer(-1000000, 1000000), rng.integer(0, std::int64_t{1} << 50)};
    case 2: {
      ErrorReply m;
      if (rng.coin()) m.ref = rng.integer(-1000, 1000);
      static const char* codes[] = {codes::kMalformed, codes::kUnknownType, codes::kInvalidParams, codes::kHalted};
      m.code = codes[rng.integer(0, 3)];
      m.message = rng.coin() ? "bad \"thing\"\n\ttab" : "";
      return m;
    }
    default: {
      SessionConfig c;
      c.wheel.mass_kg = rng.uniform(0.1, 10);
      return Hello{to_json(c), kProtocolVersion};
    }
  }
}

}  // namespace gyrolab::test
