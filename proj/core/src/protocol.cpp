#include "gyrolab/protocol.hpp"

#include <cstdint>

#include "gyrolab/config.hpp"
#include "gyrolab/error.hpp"

namespace gyrolab::gateway {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

bool is_int64(const json& v) {
  if (!v.is_number_integer()) return false;
  return !v.is_number_unsigned() || v.get<std::uint64_t>() <= std::uint64_t(INT64_MAX);
}

json envelope(const char* type) { return json{{"type", type}, {"protocol_version", kProtocolVersion}}; }

class Fields {
 public:
  Fields(const json& j, std::optional<std::int64_t> ref, const char* error_code)
      : j_(j), ref_(ref), code_(error_code) {}

  [[noreturn]] void fail(const std::string& message) const { throw ProtocolError(code_, message, ref_); }

  const json& required(const char* key) const {
    if (!j_.contains(key)) fail(std::string("missing field '") + key + "'");
    return j_.at(key);
  }

  double number(const char* key) const {
    const json& v = required(key);
    if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(const char* key) const {
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(const char* key) const {
    const json& v = required(key);
    if (!is_int64(v)) fail(std::string("field '") + key + "' must be a 64-bit integer");
    return v.get<std::int64_t>();
  }

  std::optional<std::int64_t> optional_integer(const char* key) const {
    if (!j_.contains(key) || j_.at(key).is_null()) return std::nullopt;
    return integer(key);
  }

  std::string string(const char* key) const {
    const json& v = required(key);
    if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
  }

  Vec3 vec3(const char* key) const {
    const json& v = required(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      fail(std::string("field '") + key + "' must be an array of three numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  const json& j_;
  std::optional<std::int64_t> ref_;
  const char* code_;
};

struct Envelope {
  json body;
  std::string type;
  std::optional<std::int64_t> ref;
};

Envelope open(std::string_view text) {
  Envelope env;
  try {
    env.body = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError(codes::kMalformed, std::string("frame is not valid JSON: ") + e.what());
  }
  if (!env.body.is_object()) throw ProtocolError(codes::kMalformed, "frame must be a JSON object");
  if (env.body.contains("ref") && is_int64(env.body.at("ref"))) {
    env.ref = env.body.at("ref").get<std::int64_t>();
  }
  const auto version = env.body.find("protocol_version");
  if (version == env.body.end() || !version->is_number_integer()) {
    throw ProtocolError(codes::kProtocolVersion, "missing protocol_version", env.ref);
  }
  if (*version != kProtocolVersion) {
    throw ProtocolError(codes::kProtocolVersion, "unsupported protocol_version " + version->dump(),
                        env.ref);
  }
  const auto type = env.body.find("type");
  if (type == env.body.end() || !type->is_string()) {
    throw ProtocolError(codes::kMalformed, "missing message type", env.ref);
  }
  env.type = type->get<std::string>();
  return env;
}

std::optional<dynamics::InertiaModel> inertia_field(const json& body, const Fields& f) {
  if (!body.contains("inertia_model") || body.at("inertia_model").is_null()) return std::nullopt;
  try {
    return wheel_params_from_json(json{{"inertia_model", body.at("inertia_model")}}).inertia_model;
  } catch (const Error& e) {
    f.fail(e.what());
  }
}

json inertia_json(const dynamics::InertiaModel& model) {
  dynamics::WheelParams p;
  p.inertia_model = model;
  return to_json(p).at("inertia_model");
}

}  // namespace

dynamics::WheelParams SetParams::apply_to(dynamics::WheelParams base) const {
  if (mass_kg) base.mass_kg = *mass_kg;
  if (wheel_radius_m) base.wheel_radius_m = *wheel_radius_m;
  if (handle_length_m) base.handle_length_m = *handle_length_m;
  if (spin_rate_rad_s) base.spin_rate_rad_s = *spin_rate_rad_s;
  if (inertia_model) base.inertia_model = *inertia_model;
  if (gravity_m_s2) base.gravity_m_s2 = *gravity_m_s2;
  return base;
}

std::string serialize(const ClientMessage& message) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        json j;
        if constexpr (std::is_same_v<T, SetParams>) {
          j = envelope("SetParams");
          const auto put = [&j](const char* key, const std::optional<double>& v) {
            if (v) j[key] = *v;
          };
          put("mass_kg", m.mass_kg);
          put("wheel_radius_m", m.wheel_radius_m);
          put("handle_length_m", m.handle_length_m);
          put("spin_rate_rad_s", m.spin_rate_rad_s);
          put("gravity_m_s2", m.gravity_m_s2);
          if (m.inertia_model) j["inertia_model"] = inertia_json(*m.inertia_model);
        } else if constexpr (std::is_same_v<T, Pointer>) {
          j = envelope("Pointer");
          j["device"] = device::to_string(m.device);
          j["position"] = vec_json(m.position);
          if (m.tick_hint) j["tick_hint"] = *m.tick_hint;
        } else if constexpr (std::is_same_v<T, Start>) {
          j = envelope("Start");
        } else if constexpr (std::is_same_v<T, Pause>) {
          j = envelope("Pause");
        } else if constexpr (std::is_same_v<T, Reset>) {
          j = envelope("Reset");
        } else {
          j = envelope("LoadPreset");
          j["name"] = m.name;
        }
        j["ref"] = m.ref;
        return j.dump();
      },
      message);
}

std::string serialize(const ServerMessage& message) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        json j;
        if constexpr (std::is_same_v<T, Snapshot>) {
          const StateSnapshot& s = m.state;
          j = envelope("Snapshot");
          j["tick"] = s.tick;
          j["t"] = s.t;
          j["axle"] = vec_json(s.axle);
          j["theta"] = s.theta;
          j["wheel_phase"] = s.wheel_phase;
          j["L_world"] = vec_json(s.angular_momentum);
          j["tau_world"] = vec_json(s.torque);
          j["forceA"] = vec_json(s.force_a);
          j["forceB"] = vec_json(s.force_b);
          j["omega"] = s.omega;
        } else if constexpr (std::is_same_v<T, Ack>) {
          j = envelope("Ack");
          j["ref"] = m.ref;
          j["effective_tick"] = m.effective_tick;
        } else if constexpr (std::is_same_v<T, ErrorReply>) {
          j = envelope("Error");
          j["ref"] = m.ref ? json(*m.ref) : json(nullptr);
          j["code"] = m.code;
          j["message"] = m.message;
        } else {
          j = envelope("Hello");
          j["protocol_version"] = m.protocol_version;
          j["config"] = m.config;
        }
        return j.dump();
      },
      message);
}

ClientMessage parse_client(std::string_view text) {
  const Envelope env = open(text);
  const json& body = env.body;
  const Fields f(body, env.ref, codes::kMalformed);
  if (!env.ref) f.fail("client messages need an integer 'ref'");
  const std::int64_t ref = *env.ref;

  if (env.type == "SetParams") {
    const Fields p(body, env.ref, codes::kInvalidParams);
    SetParams m;
    m.ref = ref;
    m.mass_kg = p.optional_number("mass_kg");
    m.wheel_radius_m = p.optional_number("wheel_radius_m");
    m.handle_length_m = p.optional_number("handle_length_m");
    m.spin_rate_rad_s = p.optional_number("spin_rate_rad_s");
    m.gravity_m_s2 = p.optional_number("gravity_m_s2");
    m.inertia_model = inertia_field(body, p);
    return m;
  }
  if (env.type == "Pointer") {
    const Fields p(body, env.ref, codes::kInvalidPointer);
    Pointer m;
    m.ref = ref;
    const std::string device = p.string("device");
    if (device == "A") m.device = device::DeviceId::kA;
    else if (device == "B") m.device = device::DeviceId::kB;
    else p.fail("device must be \"A\" or \"B\"");
    m.position = p.vec3("position");
    m.tick_hint = p.optional_integer("tick_hint");
    return m;
  }
  if (env.type == "Start") return Start{ref};
  if (env.type == "Pause") return Pause{ref};
  if (env.type == "Reset") return Reset{ref};
  if (env.type == "LoadPreset") return LoadPreset{ref, f.string("name")};
  throw ProtocolError(codes::kUnknownType, "unknown message type '" + env.type + "'", env.ref);
}

ServerMessage parse_server(std::string_view text) {
  const Envelope env = open(text);
  const json& body = env.body;
  const Fields f(body, env.ref, codes::kMalformed);
  if (env.type == "Snapshot") {
    Snapshot m;
    StateSnapshot& s = m.state;
    s.tick = f.integer("tick");
    s.t = f.number("t");
    s.axle = f.vec3("axle");
    s.theta = f.number("theta");
    s.wheel_phase = f.number("wheel_phase");
    s.angular_momentum = f.vec3("L_world");
    s.torque = f.vec3("tau_world");
    s.force_a = f.vec3("forceA");
    s.force_b = f.vec3("forceB");
    s.omega = f.number("omega");
    return m;
  }
  if (env.type == "Ack") return Ack{f.integer("ref"), f.integer("effective_tick")};
  if (env.type == "Error") return ErrorReply{f.optional_integer("ref"), f.string("code"), f.string("message")};
  if (env.type == "Hello") {
    Hello m;
    m.config = f.required("config");
    m.protocol_version = static_cast<int>(f.integer("protocol_version"));
    return m;
  }
  throw ProtocolError(codes::kUnknownType, "unknown message type '" + env.type + "'", env.ref);
}

std::optional<dynamics::WheelParams> preset(std::string_view name, const dynamics::WheelParams& base) {
  if (name == "default") return base;
  if (name == "reference_wheel") {
    dynamics::WheelParams p;
    p.mass_kg = 1.5;
    p.wheel_radius_m = 0.2921;
    p.handle_length_m = 0.15;
    p.spin_rate_rad_s = 60.0;
    p.inertia_model = dynamics::InertiaShape::kHoop;
    return p;
  }
  if (name == "heavy_wheel") {
    auto p = base;
    p.mass_kg *= 2.0;
    return p;
  }
  if (name == "fast_spin") {
    auto p = base;
    p.spin_rate_rad_s = 90.0;
    return p;
  }
  if (name == "stopped") {
    auto p = base;
    p.spin_rate_rad_s = 0.0;
    return p;
  }
  if (name == "disk") {
    auto p = base;
    p.inertia_model = dynamics::InertiaShape::kDisk;
    return p;
  }
  return std::nullopt;
}

}  // namespace gyrolab::gateway
