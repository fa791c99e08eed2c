#pragma once

#include <cmath>

namespace gwv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  // counterclockwise quarter turn
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const { double n = norm(); return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0}; }
};

inline Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

// row-major 2x2 matrix, enough for Jacobians of planar fields
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  // t^T M t, the tangential divergence contraction used by first variations
  double quad(Vec2 t) const {
    return t.x * (a11 * t.x + a12 * t.y) + t.y * (a21 * t.x + a22 * t.y);
  }
};

// line through the origin, encoded as an angle in [0, pi)
inline double line_angle(Vec2 v) {
  double a = std::atan2(v.y, v.x);
  if (a < 0.0) a += 3.14159265358979323846;
  if (a >= 3.14159265358979323846) a -= 3.14159265358979323846;
  return a;
}

inline Vec2 line_dir(double theta) { return {std::cos(theta), std::sin(theta)}; }

// plain atan2 angle in (-pi, pi]
inline double full_angle(Vec2 v) { return std::atan2(v.y, v.x); }

constexpr double kPi = 3.14159265358979323846;

}  // namespace gwv
