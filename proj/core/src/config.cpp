#include "gyrolab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "gyrolab/error.hpp"

namespace gyrolab {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Collects every problem so a bad config is reported in one pass.
class Issues {
 public:
  void add(const std::string& field, const std::string& problem) {
    items_.push_back(field + ": " + problem);
  }
  void check(bool ok, const std::string& field, const std::string& problem) {
    if (!ok) add(field, problem);
  }
  void raise_if_any() const {
    if (items_.empty()) return;
    std::string message = "invalid config";
    for (std::size_t i = 0; i < items_.size(); ++i) message += (i == 0 ? ": " : "; ") + items_[i];
    throw Error(ErrorCode::kInvalidConfig, message);
  }

 private:
  std::vector<std::string> items_;
};

class Reader {
 public:
  Reader(const json& j, std::string path, Issues& issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (!j_.is_object()) issues_.add(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool ok() const { return j_.is_object(); }
  bool has(const std::string& key) const { return ok() && j_.contains(key); }
  const json& at(const std::string& key) const { return j_.at(key); }

  void number(const std::string& key, double& out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) {
      issues_.add(field(key), "expected a number");
      return;
    }
    out = v.get<double>();
  }

  void integer(const std::string& key, std::int64_t& out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) {
      issues_.add(field(key), "expected an integer");
      return;
    }
    out = v.get<std::int64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    seen_.push_back(key);
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) {
      issues_.add(field(key), "expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  void vec3(const std::string& key, Vec3& out) {
    seen_.push_back(key);
    if (!has(key)) return;
    out = read_vec3(j_.at(key), field(key), issues_);
  }

  void mark(const std::string& key) { seen_.push_back(key); }

  void reject_unknown() const {
    if (!ok()) return;
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        issues_.add(field(key), "unknown key");
      }
    }
  }

  static Vec3 read_vec3(const json& v, const std::string& field, Issues& issues) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
      issues.add(field, "expected an array of three numbers");
      return Vec3::Zero();
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  const json& j_;
  std::string path_;
  Issues& issues_;
  std::vector<std::string> seen_;
};

dynamics::InertiaModel inertia_from_json(const json& v, const std::string& field, Issues& issues) {
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (name == "hoop") return dynamics::InertiaShape::kHoop;
    if (name == "disk") return dynamics::InertiaShape::kDisk;
    issues.add(field, "expected \"hoop\", \"disk\" or {\"explicit\": [Ix, Iy, Iz]}");
    return dynamics::InertiaShape::kHoop;
  }
  if (v.is_object() && v.size() == 1 && v.contains("explicit")) {
    return dynamics::InertiaTensor{Reader::read_vec3(v.at("explicit"), field + ".explicit", issues)};
  }
  issues.add(field, "expected \"hoop\", \"disk\" or {\"explicit\": [Ix, Iy, Iz]}");
  return dynamics::InertiaShape::kHoop;
}

json inertia_to_json(const dynamics::InertiaModel& model) {
  if (const auto* shape = std::get_if<dynamics::InertiaShape>(&model)) {
    return *shape == dynamics::InertiaShape::kHoop ? "hoop" : "disk";
  }
  return json{{"explicit", vec_json(std::get<dynamics::InertiaTensor>(model).principal)}};
}

dynamics::WheelParams read_wheel(const json& j, const std::string& path, Issues& issues,
                                 dynamics::WheelParams params) {
  Reader r(j, path, issues);
  if (!r.ok()) return params;
  r.number("mass_kg", params.mass_kg);
  r.number("wheel_radius_m", params.wheel_radius_m);
  r.number("handle_length_m", params.handle_length_m);
  r.number("spin_rate_rad_s", params.spin_rate_rad_s);
  r.number("gravity_m_s2", params.gravity_m_s2);
  r.mark("inertia_model");
  if (r.has("inertia_model")) {
    params.inertia_model = inertia_from_json(r.at("inertia_model"), r.field("inertia_model"), issues);
  }
  r.reject_unknown();
  return params;
}

void check_wheel(const dynamics::WheelParams& w, const std::string& path, Issues& issues) {
  const auto f = [&path](const char* key) { return path + "." + key; };
  issues.check(std::isfinite(w.mass_kg) && w.mass_kg > 0, f("mass_kg"), "must be positive");
  issues.check(std::isfinite(w.wheel_radius_m) && w.wheel_radius_m > 0, f("wheel_radius_m"),
               "must be positive");
  issues.check(std::isfinite(w.handle_length_m) && w.handle_length_m >= 0, f("handle_length_m"),
               "must be non-negative");
  issues.check(std::isfinite(w.spin_rate_rad_s), f("spin_rate_rad_s"), "must be finite");
  issues.check(std::isfinite(w.gravity_m_s2) && w.gravity_m_s2 > 0, f("gravity_m_s2"),
               "must be positive");
  if (const auto* tensor = std::get_if<dynamics::InertiaTensor>(&w.inertia_model)) {
    try {
      tensor->validate();
    } catch (const Error& e) {
      issues.add(f("inertia_model"), e.what());
    }
  }
}

haptics::PiecewiseLinear read_table(const json& v, const std::string& field, Issues& issues) {
  std::vector<haptics::PiecewiseLinear::Knot> knots;
  if (!v.is_array()) {
    issues.add(field, "expected an array of [position, force] pairs");
  } else {
    for (const json& k : v) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        issues.add(field, "expected an array of [position, force] pairs");
        knots.clear();
        break;
      }
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
  }
  try {
    return haptics::PiecewiseLinear(std::move(knots));
  } catch (const Error& e) {
    issues.add(field, e.what());
    return haptics::PiecewiseLinear({{0.0, 0.0}, {1.0, 0.0}});
  }
}

haptics::ForceEffect read_effect(const json& j, const std::string& path, Issues& issues) {
  Reader r(j, path, issues);
  if (!r.ok()) return haptics::Viscosity{};
  r.mark("kind");
  const std::string kind = r.has("kind") && r.at("kind").is_string() ? r.at("kind").get<std::string>() : "";
  haptics::ForceEffect effect = haptics::Viscosity{};
  if (kind == "spring") {
    haptics::Spring s;
    r.vec3("anchor", s.anchor);
    r.number("stiffness", s.stiffness);
    r.number("damping", s.damping);
    effect = s;
  } else if (kind == "viscosity") {
    haptics::Viscosity v;
    r.number("coefficient", v.coefficient);
    effect = v;
  } else if (kind == "position_function") {
    haptics::PositionFunction pf;
    for (const char* axis : {"fx", "fy", "fz"}) {
      r.mark(axis);
      if (!r.has(axis) || r.at(axis).is_null()) continue;
      auto table = read_table(r.at(axis), r.field(axis), issues);
      if (axis[1] == 'x') pf.fx = std::move(table);
      if (axis[1] == 'y') pf.fy = std::move(table);
      if (axis[1] == 'z') pf.fz = std::move(table);
    }
    effect = std::move(pf);
  } else {
    issues.add(r.field("kind"), "expected \"spring\", \"viscosity\" or \"position_function\"");
    return effect;
  }
  r.reject_unknown();
  try {
    haptics::validate(effect);
  } catch (const Error& e) {
    issues.add(path, e.what());
  }
  return effect;
}

DeviceSpec read_device(const json& j, const std::string& path, Issues& issues) {
  DeviceSpec spec;
  Reader r(j, path, issues);
  if (!r.ok()) return spec;
  r.mark("kind");
  r.mark("trajectory");
  const std::string kind = r.has("kind") && r.at("kind").is_string() ? r.at("kind").get<std::string>() : "";
  if (kind == "free") {
    spec.kind = DeviceSpec::Kind::kFree;
  } else if (kind == "interactive") {
    spec.kind = DeviceSpec::Kind::kInteractive;
  } else if (kind == "scripted") {
    spec.kind = DeviceSpec::Kind::kScripted;
    if (!r.has("trajectory") || !r.at("trajectory").is_array()) {
      issues.add(r.field("trajectory"), "scripted devices need a trajectory array");
    } else {
      std::size_t i = 0;
      for (const json& s : r.at("trajectory")) {
        const std::string field = r.field("trajectory") + "[" + std::to_string(i++) + "]";
        if (!s.is_object() || !s.contains("tick") || !s.at("tick").is_number_integer() ||
            !s.contains("position")) {
          issues.add(field, "expected {\"tick\": int, \"position\": [x, y, z]}");
          continue;
        }
        spec.trajectory.push_back(
            {s.at("tick").get<std::int64_t>(), Reader::read_vec3(s.at("position"), field + ".position", issues)});
      }
    }
  } else {
    issues.add(r.field("kind"), "expected \"free\", \"scripted\" or \"interactive\"");
  }
  r.reject_unknown();
  return spec;
}

json device_to_json(const DeviceSpec& spec) {
  switch (spec.kind) {
    case DeviceSpec::Kind::kFree: return json{{"kind", "free"}};
    case DeviceSpec::Kind::kInteractive: return json{{"kind", "interactive"}};
    case DeviceSpec::Kind::kScripted: {
      json trajectory = json::array();
      for (const auto& s : spec.trajectory) {
        trajectory.push_back(json{{"tick", s.tick}, {"position", vec_json(s.position)}});
      }
      return json{{"kind", "scripted"}, {"trajectory", trajectory}};
    }
  }
  return json{};
}

void check_config(const SessionConfig& c, Issues& issues) {
  check_wheel(c.wheel, "wheel", issues);
  issues.check(std::isfinite(c.initial_theta_rad) && c.initial_theta_rad >= 0 &&
                   c.initial_theta_rad <= std::numbers::pi,
               "initial_theta_rad", "must lie in [0, pi]");
  issues.check(std::isfinite(c.initial_azimuth_rad), "initial_azimuth_rad", "must be finite");
  const auto& caps = c.servo.caps;
  issues.check(std::isfinite(caps.max_force_N) && caps.max_force_N > 0, "device_caps.max_force_N",
               "must be positive");
  issues.check(std::isfinite(caps.workspace_side_m) && caps.workspace_side_m > 0,
               "device_caps.workspace_side_m", "must be positive");
  issues.check(std::isfinite(caps.servo_rate_Hz) && caps.servo_rate_Hz > 0,
               "device_caps.servo_rate_Hz", "must be positive");
  issues.check(std::isfinite(c.dt) && c.dt > 0, "dt", "must be positive");
  issues.check(std::abs(c.dt * caps.servo_rate_Hz - 1.0) <= 1e-9, "dt",
               "must equal 1 / device_caps.servo_rate_Hz");
  issues.check(c.snapshot_decimation >= 1, "snapshot_decimation", "must be at least 1");
  issues.check(c.release_ticks >= 0, "release_ticks", "must be non-negative");
  const auto& map = c.servo.coupling;
  issues.check(std::isfinite(map.sphere_radius_m) && map.sphere_radius_m > 0,
               "coupling.sphere_radius_m", "must be positive");
  issues.check(std::isfinite(map.stiffness_N_m) && map.stiffness_N_m >= 0, "coupling.stiffness_N_m",
               "must be non-negative");
  const auto& st = c.servo.stabilizer;
  issues.check(std::isfinite(st.stiffness_N_m) && st.stiffness_N_m >= 0, "stabilizer.stiffness_N_m",
               "must be non-negative");
  issues.check(std::isfinite(st.damping_N_s_m) && st.damping_N_s_m >= 0, "stabilizer.damping_N_s_m",
               "must be non-negative");
  const auto& hold = c.servo.hold;
  issues.check(std::isfinite(hold.stiffness_Nm_rad) && hold.stiffness_Nm_rad >= 0,
               "hold.stiffness_Nm_rad", "must be non-negative");
  issues.check(std::isfinite(hold.damping_Nms_rad) && hold.damping_Nms_rad >= 0,
               "hold.damping_Nms_rad", "must be non-negative");
  issues.check(std::isfinite(c.servo.feel_gain) && c.servo.feel_gain >= 0, "feel_gain",
               "must be non-negative");
  for (std::size_t i = 0; i < c.servo.effects.size(); ++i) {
    try {
      haptics::validate(c.servo.effects[i]);
    } catch (const Error& e) {
      issues.add("effects[" + std::to_string(i) + "]", e.what());
    }
  }
  for (const auto& [name, spec] : {std::pair{"devices.A", &c.device_a}, std::pair{"devices.B", &c.device_b}}) {
    if (spec->kind != DeviceSpec::Kind::kScripted) continue;
    try {
      device::ScriptedSource{spec->trajectory};
    } catch (const Error& e) {
      issues.add(std::string(name) + ".trajectory", e.what());
    }
  }
}

}  // namespace

void SessionConfig::validate() const {
  Issues issues;
  check_config(*this, issues);
  issues.raise_if_any();
}

json to_json(const dynamics::WheelParams& p) {
  return json{{"mass_kg", p.mass_kg},
              {"wheel_radius_m", p.wheel_radius_m},
              {"handle_length_m", p.handle_length_m},
              {"spin_rate_rad_s", p.spin_rate_rad_s},
              {"inertia_model", inertia_to_json(p.inertia_model)},
              {"gravity_m_s2", p.gravity_m_s2}};
}

dynamics::WheelParams wheel_params_from_json(const json& j, const dynamics::WheelParams& base) {
  Issues issues;
  const auto params = read_wheel(j, "", issues, base);
  issues.raise_if_any();
  return params;
}

json to_json(const haptics::ForceEffect& effect) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, haptics::Spring>) {
          return json{{"kind", "spring"}, {"anchor", vec_json(e.anchor)},
                      {"stiffness", e.stiffness}, {"damping", e.damping}};
        } else if constexpr (std::is_same_v<T, haptics::Viscosity>) {
          return json{{"kind", "viscosity"}, {"coefficient", e.coefficient}};
        } else {
          const auto table = [](const std::optional<haptics::PiecewiseLinear>& f) -> json {
            if (!f) return nullptr;
            json knots = json::array();
            for (const auto& [x, y] : f->knots()) knots.push_back(json::array({x, y}));
            return knots;
          };
          return json{{"kind", "position_function"}, {"fx", table(e.fx)}, {"fy", table(e.fy)},
                      {"fz", table(e.fz)}};
        }
      },
      effect);
}

haptics::ForceEffect effect_from_json(const json& j) {
  Issues issues;
  auto effect = read_effect(j, "effect", issues);
  issues.raise_if_any();
  return effect;
}

json to_json(const SessionConfig& c) {
  json effects = json::array();
  for (const auto& e : c.servo.effects) effects.push_back(to_json(e));
  json mirrored = json::array();
  for (std::size_t i = 0; i < 3; ++i) {
    if (c.servo.coupling.mirrored[i]) mirrored.push_back(std::string(1, "xyz"[i]));
  }
  return json{
      {"wheel", to_json(c.wheel)},
      {"initial_theta_rad", c.initial_theta_rad},
      {"initial_azimuth_rad", c.initial_azimuth_rad},
      {"device_caps",
       {{"max_force_N", c.servo.caps.max_force_N},
        {"workspace_side_m", c.servo.caps.workspace_side_m},
        {"servo_rate_Hz", c.servo.caps.servo_rate_Hz}}},
      {"coupling",
       {{"mirrored_axes", mirrored},
        {"sphere_radius_m", c.servo.coupling.sphere_radius_m},
        {"stiffness_N_m", c.servo.coupling.stiffness_N_m}}},
      {"stabilizer",
       {{"enabled", c.servo.stabilizer.enabled},
        {"stiffness_N_m", c.servo.stabilizer.stiffness_N_m},
        {"damping_N_s_m", c.servo.stabilizer.damping_N_s_m}}},
      {"hold",
       {{"stiffness_Nm_rad", c.servo.hold.stiffness_Nm_rad},
        {"damping_Nms_rad", c.servo.hold.damping_Nms_rad}}},
      {"feel_gain", c.servo.feel_gain},
      {"effects", effects},
      {"dt", c.dt},
      {"snapshot_decimation", c.snapshot_decimation},
      {"release_ticks", c.release_ticks},
      {"devices", {{"A", device_to_json(c.device_a)}, {"B", device_to_json(c.device_b)}}},
  };
}

SessionConfig config_from_json(const json& j) {
  Issues issues;
  SessionConfig c;
  Reader r(j, "", issues);
  if (!r.ok()) issues.raise_if_any();

  r.mark("wheel");
  if (r.has("wheel")) c.wheel = read_wheel(r.at("wheel"), "wheel", issues, c.wheel);
  r.number("initial_theta_rad", c.initial_theta_rad);
  r.number("initial_azimuth_rad", c.initial_azimuth_rad);

  bool rate_given = false;
  r.mark("device_caps");
  if (r.has("device_caps")) {
    Reader caps(r.at("device_caps"), "device_caps", issues);
    if (caps.ok()) {
      caps.number("max_force_N", c.servo.caps.max_force_N);
      caps.number("workspace_side_m", c.servo.caps.workspace_side_m);
      rate_given = caps.has("servo_rate_Hz");
      caps.number("servo_rate_Hz", c.servo.caps.servo_rate_Hz);
      caps.reject_unknown();
    }
  }

  r.mark("coupling");
  if (r.has("coupling")) {
    Reader map(r.at("coupling"), "coupling", issues);
    if (map.ok()) {
      map.mark("mirrored_axes");
      if (map.has("mirrored_axes")) {
        const json& axes = map.at("mirrored_axes");
        c.servo.coupling.mirrored = {false, false, false};
        if (!axes.is_array()) {
          issues.add("coupling.mirrored_axes", "expected an array of axis names");
        } else {
          for (const json& a : axes) {
            const std::string name = a.is_string() ? a.get<std::string>() : "";
            if (name == "x") c.servo.coupling.mirrored[0] = true;
            else if (name == "y") c.servo.coupling.mirrored[1] = true;
            else if (name == "z") c.servo.coupling.mirrored[2] = true;
            else issues.add("coupling.mirrored_axes", "axis names must be \"x\", \"y\" or \"z\"");
          }
        }
      }
      map.number("sphere_radius_m", c.servo.coupling.sphere_radius_m);
      map.number("stiffness_N_m", c.servo.coupling.stiffness_N_m);
      map.reject_unknown();
    }
  }

  r.mark("stabilizer");
  if (r.has("stabilizer")) {
    Reader st(r.at("stabilizer"), "stabilizer", issues);
    if (st.ok()) {
      st.boolean("enabled", c.servo.stabilizer.enabled);
      st.number("stiffness_N_m", c.servo.stabilizer.stiffness_N_m);
      st.number("damping_N_s_m", c.servo.stabilizer.damping_N_s_m);
      st.reject_unknown();
    }
  }

  r.mark("hold");
  if (r.has("hold")) {
    Reader hold(r.at("hold"), "hold", issues);
    if (hold.ok()) {
      hold.number("stiffness_Nm_rad", c.servo.hold.stiffness_Nm_rad);
      hold.number("damping_Nms_rad", c.servo.hold.damping_Nms_rad);
      hold.reject_unknown();
    }
  }

  r.number("feel_gain", c.servo.feel_gain);

  r.mark("effects");
  if (r.has("effects")) {
    if (!r.at("effects").is_array()) {
      issues.add("effects", "expected an array");
    } else {
      std::size_t i = 0;
      for (const json& e : r.at("effects")) {
        c.servo.effects.push_back(read_effect(e, "effects[" + std::to_string(i++) + "]", issues));
      }
    }
  }

  const bool dt_given = r.has("dt");
  r.number("dt", c.dt);
  if (dt_given && !rate_given) c.servo.caps.servo_rate_Hz = 1.0 / c.dt;
  if (rate_given && !dt_given) c.dt = 1.0 / c.servo.caps.servo_rate_Hz;

  r.integer("snapshot_decimation", c.snapshot_decimation);
  r.integer("release_ticks", c.release_ticks);

  r.mark("devices");
  if (r.has("devices")) {
    Reader devices(r.at("devices"), "devices", issues);
    if (devices.ok()) {
      devices.mark("A");
      devices.mark("B");
      if (devices.has("A")) c.device_a = read_device(devices.at("A"), "devices.A", issues);
      if (devices.has("B")) c.device_b = read_device(devices.at("B"), "devices.B", issues);
      devices.reject_unknown();
    }
  }
  r.reject_unknown();

  check_config(c, issues);
  issues.raise_if_any();
  return c;
}

SessionConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, "config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string canonical_dump(const SessionConfig& config) { return to_json(config).dump(); }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0x0f]);
  }
  return out;
}

std::string config_hash(const SessionConfig& config) { return sha256_hex(canonical_dump(config)); }

}  // namespace gyrolab
