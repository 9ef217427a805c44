#include "cca/geometry.hpp"

#include <algorithm>

namespace cca {

double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

double normalize_heading(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  if (a >= two_pi) a = 0.0;
  return a;
}

OrientedRect make_rect(const Vec2& center, double heading, double length, double width) {
  OrientedRect r;
  r.center = center;
  r.heading = heading;
  r.length = length;
  r.width = width;
  const Vec2 fwd{std::cos(heading), std::sin(heading)};
  const Vec2 left{-fwd.y, fwd.x};
  const Vec2 dl = fwd * (0.5 * length);
  const Vec2 dw = left * (0.5 * width);
  r.corners = {center + dl + dw, center - dl + dw, center - dl - dw, center + dl - dw};
  return r;
}

namespace {

// Projects all corners of r onto axis and returns [min, max].
std::pair<double, double> project_onto(const OrientedRect& r, const Vec2& axis) {
  double lo = r.corners[0].dot(axis);
  double hi = lo;
  for (std::size_t i = 1; i < 4; ++i) {
    const double v = r.corners[i].dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

bool separated_on(const OrientedRect& a, const OrientedRect& b, const Vec2& axis) {
  const auto [alo, ahi] = project_onto(a, axis);
  const auto [blo, bhi] = project_onto(b, axis);
  return ahi < blo || bhi < alo;  // strict: touching intervals are not separated
}

}  // namespace

bool rects_overlap(const OrientedRect& a, const OrientedRect& b) {
  const Vec2 axes[4] = {
      (a.corners[0] - a.corners[1]).normalized(),
      (a.corners[1] - a.corners[2]).normalized(),
      (b.corners[0] - b.corners[1]).normalized(),
      (b.corners[1] - b.corners[2]).normalized(),
  };
  for (const Vec2& edge : axes) {
    const Vec2 normal{-edge.y, edge.x};
    if (separated_on(a, b, normal)) return false;
  }
  return true;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

double segment_segment_distance(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  // Proper intersection means zero distance.
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q - p).cross(r - p);
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return 0.0;
  return std::min(std::min(point_segment_distance(a, c, d), point_segment_distance(b, c, d)),
                  std::min(point_segment_distance(c, a, b), point_segment_distance(d, a, b)));
}

double rect_distance(const OrientedRect& a, const OrientedRect& b) {
  if (rects_overlap(a, b)) return 0.0;
  double best = (a.center - b.center).norm();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      best = std::min(best, segment_segment_distance(a.corners[i], a.corners[(i + 1) % 4],
                                                     b.corners[j], b.corners[(j + 1) % 4]));
    }
  }
  return best;
}

}  // namespace cca
