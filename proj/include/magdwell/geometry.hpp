#pragma once

#include <cmath>

namespace magdwell {

/// Point in the plane. x∧y ≡ x1·y2 − x2·y1 and z⊥ ≡ (−z2, z1) throughout,
/// so x·z⊥ = −(x∧z).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
  Point2 operator-() const { return {-x, -y}; }
  Point2 operator*(double s) const { return {s * x, s * y}; }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline Point2 perp(Point2 z) { return {-z.y, z.x}; }
inline double norm2(Point2 a) { return dot(a, a); }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }

}  // namespace magdwell
