#pragma once

#include "vemdd/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vemdd {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline Vec3 to_vec(const Point& p) { return {p[0], p[1], p[2]}; }
inline Point to_point(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

} // namespace vemdd
