#pragma once

// Shared helpers for the test suites: a seeded generator and oracles that are
// deliberately computed without the library (plain arrays, no Eigen).

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "gyrolab/config.hpp"
#include "gyrolab/vec.hpp"

namespace gyrolab::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  bool coin() { return integer(0, 1) == 1; }
  std::mt19937_64& engine() { return engine_; }
  Vec3 vec(double lo, double hi) { return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)); }
  Vec3 unit() {
    for (;;) {
      const Vec3 v = vec(-1.0, 1.0);
      const double n = v.norm();
      if (n > 1e-3 && n <= 1.0) return v / n;
    }
  }

 private:
  std::mt19937_64 engine_;
};

using A3 = std::array<double, 3>;

inline A3 arr(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline A3 cross(const A3& a, const A3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const A3& a, const A3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double norm(const A3& a) { return std::sqrt(dot(a, a)); }

/// (r a) x (-M g z), written out by hand.
inline A3 gravity_torque_oracle(double r, double mass, double g, const A3& axle) {
  const A3 arm{r * axle[0], r * axle[1], r * axle[2]};
  const A3 weight{0.0, 0.0, -mass * g};
  return cross(arm, weight);
}

/// Axle for polar angle theta and azimuth phi, spherical coordinates.
inline A3 spherical(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline double rel_err(double measured, double expected) {
  return std::abs(measured - expected) / std::max(std::abs(expected), 1e-300);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(slurp(path)); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gyrolab-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gyrolab::test
