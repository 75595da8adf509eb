#include "gyrolab/device.hpp"

#include <cmath>

#include "gyrolab/error.hpp"

namespace gyrolab::device {

const char* to_string(DeviceId id) { return id == DeviceId::kA ? "A" : "B"; }

void CouplingMap::validate() const {
  if (!(std::isfinite(sphere_radius_m) && sphere_radius_m > 0)) {
    throw Error(ErrorCode::kInvalidParameter, "coupling sphere radius must be positive");
  }
  if (!(std::isfinite(stiffness_N_m) && stiffness_N_m >= 0)) {
    throw Error(ErrorCode::kInvalidParameter, "coupling stiffness must be non-negative");
  }
}

Vec3 couple(const Vec3& v, const CouplingMap& map) {
  Vec3 out = v;
  for (int i = 0; i < 3; ++i) {
    if (map.mirrored[static_cast<std::size_t>(i)]) out[i] = -out[i];
  }
  return out;
}

DevicePose couple(const DevicePose& pose, const CouplingMap& map) {
  return {couple(pose.position, map), couple(pose.velocity, map), pose.tick};
}

Vec3 to_partner_frame(const Vec3& v, const CouplingMap& map) { return -couple(v, map); }

Vec3 project_spherical(const Vec3& raw, double radius) {
  const double n = raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kUndefinedProjection, "cannot project the zero vector onto a sphere");
  }
  return raw * (radius / n);
}

Vec3 axle_from_handles(const DevicePose& pose_a, const DevicePose& pose_b_in_a_frame) {
  const Vec3 d = pose_a.position - pose_b_in_a_frame.position;
  const double n = d.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kDegenerateAxle, "axle ends coincide");
  }
  return d / n;
}

std::pair<Vec3, Vec3> coupling_correction(const DevicePose& pose_a, const DevicePose& pose_b,
                                          const CouplingMap& map) {
  const Vec3 discrepancy = pose_a.position - couple(pose_b.position, map);
  // Half the stiffness per device, acting over half the discrepancy.
  const Vec3 pull = 0.25 * map.stiffness_N_m * discrepancy;
  return {-pull, couple(pull, map)};
}

AffineMap calibrate(const Box& raw_extent, const haptics::DeviceCaps& caps) {
  const Vec3 extent = raw_extent.max - raw_extent.min;
  if (!extent.allFinite() || (extent.array() <= 0.0).any()) {
    throw Error(ErrorCode::kCalibration, "calibration extent has zero or negative volume");
  }
  AffineMap map;
  const double side = caps.workspace_side_m;
  for (int i = 0; i < 3; ++i) {
    map.scale[i] = side / extent[i];
    map.offset[i] = -0.5 * side - raw_extent.min[i] * map.scale[i];
  }
  return map;
}

ScriptedSource::ScriptedSource(std::vector<TrajectorySample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) {
    throw Error(ErrorCode::kInvalidSource, "scripted trajectory is empty");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!samples_[i].position.allFinite()) {
      throw Error(ErrorCode::kInvalidSource, "scripted trajectory has a non-finite position");
    }
    if (i > 0 && samples_[i].tick <= samples_[i - 1].tick) {
      throw Error(ErrorCode::kInvalidSource, "scripted trajectory ticks must strictly increase");
    }
  }
}

Vec3 ScriptedSource::position_at(std::int64_t tick) const {
  if (tick <= samples_.front().tick) return samples_.front().position;
  if (tick >= samples_.back().tick) return samples_.back().position;
  std::size_t hi = 1;
  while (samples_[hi].tick < tick) ++hi;
  const TrajectorySample& a = samples_[hi - 1];
  const TrajectorySample& b = samples_[hi];
  const double u = static_cast<double>(tick - a.tick) / static_cast<double>(b.tick - a.tick);
  return a.position + u * (b.position - a.position);
}

DevicePose poll(const ScriptedSource& source, std::int64_t tick, double dt) {
  const Vec3 p = source.position_at(tick);
  const Vec3 previous = source.position_at(tick - 1);
  return {p, (p - previous) / dt, tick};
}

InteractiveSource::InteractiveSource(const InteractiveSource& other) {
  std::lock_guard lock(other.mutex_);
  pending_ = other.pending_;
}

InteractiveSource& InteractiveSource::operator=(const InteractiveSource& other) {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    pending_ = other.pending_;
  }
  return *this;
}

void InteractiveSource::command(const Vec3& position) {
  std::lock_guard lock(mutex_);
  pending_ = position;
}

std::optional<Vec3> InteractiveSource::take() {
  std::lock_guard lock(mutex_);
  std::optional<Vec3> out;
  out.swap(pending_);
  return out;
}

void PoseSource::command(const Vec3& position) {
  auto* interactive = std::get_if<InteractiveSource>(&kind_);
  if (interactive == nullptr) {
    throw Error(ErrorCode::kInvalidSource, "device is not interactive");
  }
  interactive->command(position);
}

PolledPose PoseSource::poll(std::int64_t tick, double dt) {
  PolledPose out;
  out.pose.tick = tick;
  if (auto* scripted = std::get_if<ScriptedSource>(&kind_)) {
    out.pose = device::poll(*scripted, tick, dt);
    out.engaged = true;
    return out;
  }
  auto* interactive = std::get_if<InteractiveSource>(&kind_);
  if (interactive == nullptr) return out;

  out.fresh = interactive->take();
  if (out.fresh) {
    // A fresh command after a release starts from rest.
    const bool was_engaged = last_position_ && tick - last_fresh_tick_ <= release_ticks_ &&
                             last_poll_tick_ == tick - 1;
    const Vec3 previous = was_engaged ? *last_position_ : *out.fresh;
    out.pose.position = *out.fresh;
    out.pose.velocity = (*out.fresh - previous) / dt;
    last_position_ = out.fresh;
    last_fresh_tick_ = tick;
    out.engaged = true;
  } else if (last_position_ && tick - last_fresh_tick_ <= release_ticks_) {
    out.pose.position = *last_position_;
    out.engaged = true;
  }
  last_poll_tick_ = tick;
  return out;
}

void PoseSource::reset() {
  if (auto* interactive = std::get_if<InteractiveSource>(&kind_)) interactive->take();
  last_position_.reset();
  last_fresh_tick_ = 0;
  last_poll_tick_ = 0;
}

}  // namespace gyrolab::device
