#pragma once

#include <Eigen/Core>

namespace spiralflow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

} // namespace spiralflow
