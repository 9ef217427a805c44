#pragma once

#include <array>
#include <cmath>

namespace cca {

/// Planar vector / point in meters (east, north).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double k) const { return {x * k, y * k}; }
  constexpr Vec2 operator/(double k) const { return {x / k, y / k}; }
  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2& o) const = default;

  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  /// z component of the 3D cross product; positive when `o` points left of *this.
  constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  constexpr double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

constexpr Vec2 operator*(double k, const Vec2& v) { return v * k; }

/// Route point; same representation as Vec2.
using Waypoint = Vec2;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Normalizes an angle into [0, 2*pi).
double normalize_heading(double a);

/// Oriented rectangle given by its four corners in CCW order.
struct OrientedRect {
  std::array<Vec2, 4> corners;
  Vec2 center;
  double heading = 0.0;
  double length = 0.0;
  double width = 0.0;
};

OrientedRect make_rect(const Vec2& center, double heading, double length, double width);

/// Separating-axis overlap test; touching rectangles count as overlapping.
bool rects_overlap(const OrientedRect& a, const OrientedRect& b);

/// Minimum distance between two rectangles, 0 when they overlap or touch.
double rect_distance(const OrientedRect& a, const OrientedRect& b);

/// Distance between point p and segment ab.
double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

/// Distance between segments ab and cd.
double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace cca
