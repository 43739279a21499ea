#pragma once

#include <Eigen/Core>

namespace phaseflow {

using Vec2 = Eigen::Vector2d;

// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Signed area of the triangle (a, b, c); positive for counter-clockwise order.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

inline Vec2 midpoint(const Vec2& a, const Vec2& b) { return 0.5 * (a + b); }

}  // namespace phaseflow
