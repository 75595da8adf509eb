#pragma once

// Virtual haptic devices: pose sources, the mirrored coupling that turns two
// devices into the two ends of one rigid axle, and workspace calibration.
//
// Device B faces device A. With the default mirror set {y}, the B frame is
// the A frame turned half a revolution about y, so:
//   * a perfectly rigid pair satisfies  p_B == couple(p_A);
//   * the B end expressed in the A frame is  to_partner_frame(p_B) == -couple(p_B),
//     which for a rigid pair is -p_A, the opposite end of the axle.

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "gyrolab/haptics.hpp"
#include "gyrolab/vec.hpp"

namespace gyrolab::device {

enum class DeviceId { kA, kB };

const char* to_string(DeviceId id);

struct DevicePose {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  std::int64_t tick = 0;
};

struct CouplingMap {
  std::array<bool, 3> mirrored{false, true, false};  // x, y, z
  double sphere_radius_m = 0.0508;
  double stiffness_N_m = 200.0;

  void validate() const;
  friend bool operator==(const CouplingMap&, const CouplingMap&) = default;
};

/// Negates the mirrored axes. An involution.
Vec3 couple(const Vec3& v, const CouplingMap& map);
DevicePose couple(const DevicePose& pose, const CouplingMap& map);

/// B-frame vector expressed in the A frame.
Vec3 to_partner_frame(const Vec3& v, const CouplingMap& map);

/// Radial projection onto the sphere. Throws kUndefinedProjection for the
/// zero vector; the caller keeps its previous constrained point.
Vec3 project_spherical(const Vec3& raw, double radius);

/// Unit vector from the B end to the A end, both in the A frame.
/// Throws kDegenerateAxle when the ends coincide.
Vec3 axle_from_handles(const DevicePose& pose_a, const DevicePose& pose_b_in_a_frame);

/// Soft rigid-bar springs. Each device gets half of the coupling stiffness,
/// pulling it toward the midpoint of itself and the other device's mirrored
/// image. Results are (force on A in A frame, force on B in B frame), with
/// force_a == -couple(force_b).
std::pair<Vec3, Vec3> coupling_correction(const DevicePose& pose_a, const DevicePose& pose_b,
                                          const CouplingMap& map);

struct Box {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};

/// Per-axis affine map p -> scale .* p + offset.
struct AffineMap {
  Vec3 scale = Vec3::Ones();
  Vec3 offset = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale.cwiseProduct(p) + offset; }
  Vec3 invert(const Vec3& q) const { return (q - offset).cwiseQuotient(scale); }
};

/// Maps `raw_extent` onto the device workspace cube centred at the origin.
/// Throws kCalibration when any side of the box is not positive.
AffineMap calibrate(const Box& raw_extent, const haptics::DeviceCaps& caps = {});

struct TrajectorySample {
  std::int64_t tick = 0;
  Vec3 position = Vec3::Zero();
  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// Linearly interpolated, end-clamped trajectory.
class ScriptedSource {
 public:
  /// Throws kInvalidSource on an empty trajectory or non-increasing ticks.
  explicit ScriptedSource(std::vector<TrajectorySample> samples);

  Vec3 position_at(std::int64_t tick) const;
  const std::vector<TrajectorySample>& samples() const { return samples_; }

 private:
  std::vector<TrajectorySample> samples_;
};

/// Latest position commanded from another thread. Writers replace the whole
/// pose under a lock, so the servo side never sees a torn vector.
class InteractiveSource {
 public:
  InteractiveSource() = default;
  InteractiveSource(const InteractiveSource& other);
  InteractiveSource& operator=(const InteractiveSource& other);

  /// Producer side; last value wins.
  void command(const Vec3& position);

  /// Consumer side; returns the value written since the previous take(), if any.
  std::optional<Vec3> take();

 private:
  mutable std::mutex mutex_;
  std::optional<Vec3> pending_;
};

/// Hardware backends implement this; none ships with the library.
class HardwareBackend {
 public:
  virtual ~HardwareBackend() = default;
  virtual DevicePose read_pose(std::int64_t tick) = 0;
  virtual void write_force(const Vec3& force) = 0;
};

/// A device with no pose input. It is never engaged.
struct FreeSource {};

/// Result of polling a source for one tick.
struct PolledPose {
  DevicePose pose;
  bool engaged = false;
  std::optional<Vec3> fresh;  // interactive: value consumed this tick
};

class PoseSource {
 public:
  PoseSource() : kind_(FreeSource{}) {}
  explicit PoseSource(ScriptedSource scripted) : kind_(std::move(scripted)) {}
  explicit PoseSource(InteractiveSource interactive, std::int64_t release_ticks = 250)
      : kind_(std::move(interactive)), release_ticks_(release_ticks) {}

  bool is_scripted() const { return std::holds_alternative<ScriptedSource>(kind_); }
  bool is_interactive() const { return std::holds_alternative<InteractiveSource>(kind_); }
  bool is_free() const { return std::holds_alternative<FreeSource>(kind_); }

  /// Interactive only; forwards to InteractiveSource::command.
  void command(const Vec3& position);

  /// Pose for `tick`. Scripted: interpolated position, backward-difference
  /// velocity. Interactive: latest commanded position, velocity from the
  /// previous tick's position; engaged until `release_ticks` pass without a
  /// new command.
  PolledPose poll(std::int64_t tick, double dt);

  /// Clears interactive history (used on session reset).
  void reset();

 private:
  std::variant<FreeSource, ScriptedSource, InteractiveSource> kind_;
  std::int64_t release_ticks_ = 250;
  std::optional<Vec3> last_position_;
  std::int64_t last_fresh_tick_ = 0;
  std::int64_t last_poll_tick_ = 0;
};

/// Stateless poll of a scripted source.
DevicePose poll(const ScriptedSource& source, std::int64_t tick, double dt);

}  // namespace gyrolab::device
