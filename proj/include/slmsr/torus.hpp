#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace slmsr {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

// 2x2 symmetric tensor (diffusion coefficients).
struct Mat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  static Mat2 isotropic(double a) { return {a, 0.0, a}; }
  Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double min_eigenvalue() const {
    const double tr = xx + yy;
    const double d = std::sqrt((xx - yy) * (xx - yy) + 4.0 * xy * xy);
    return 0.5 * (tr - d);
  }
};

// Map a real coordinate into the torus fundamental domain [0,1).
inline double wrap(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w = 0.0;  // x slightly below an integer can round up
  return w;
}

inline Vec2 wrap(const Vec2& p) { return {wrap(p.x), wrap(p.y)}; }

// Signed representative of x in [-1/2, 1/2): minimal-image difference.
inline double torus_delta(double x) {
  double d = x - std::round(x);
  if (d < -0.5) d += 1.0;
  if (d >= 0.5) d -= 1.0;
  return d;
}

inline double torus_distance(double a, double b) { return std::abs(torus_delta(a - b)); }

inline double torus_distance(const Vec2& a, const Vec2& b) {
  const double dx = torus_delta(a.x - b.x);
  const double dy = torus_delta(a.y - b.y);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace slmsr
