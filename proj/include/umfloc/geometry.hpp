#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

namespace umfloc {

/// 2-D position in kilometres.
using Vec2 = Eigen::Vector2d;
using Points = std::vector<Vec2>;

/// Counter-clockwise rotation of `p` by `theta` radians about the origin.
inline Vec2 rotate(const Vec2& p, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x() - s * p.y(), s * p.x() + c * p.y()};
}

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace umfloc
