#pragma once

#include <cmath>

namespace vortmod {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;

  Vec2 cartesian() const { return {r * std::cos(theta), r * std::sin(theta)}; }
  static PolarPoint from(Vec2 p) { return {std::hypot(p.x, p.y), std::atan2(p.y, p.x)}; }
};

}  // namespace vortmod
