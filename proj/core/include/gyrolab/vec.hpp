#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace gyrolab {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace gyrolab
