#include "cca/path.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cca/errors.hpp"

namespace cca {

Vec2 PathSegment::eval(double l) const {
  return {((ax * l + bx) * l + cx) * l + dx, ((ay * l + by) * l + cy) * l + dy};
}

Vec2 PathSegment::derivative(double l) const {
  return {(3.0 * ax * l + 2.0 * bx) * l + cx, (3.0 * ay * l + 2.0 * by) * l + cy};
}

Vec2 PathSegment::second_derivative(double l) const {
  return {6.0 * ax * l + 2.0 * bx, 6.0 * ay * l + 2.0 * by};
}

Vec2 eval_segment(const PathSegment& seg, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw LambdaOutOfRange("segment parameter " + std::to_string(lambda) + " outside [0, 1]");
  }
  return seg.eval(lambda);
}

namespace {

// 5-point Gauss-Legendre nodes/weights on [0, 1].
constexpr double kGlNode[5] = {0.046910077030668, 0.230765344947158, 0.5,
                               0.769234655052842, 0.953089922969332};
constexpr double kGlWeight[5] = {0.118463442528095, 0.239314335249683, 0.284444444444444,
                                 0.239314335249683, 0.118463442528095};

double quadrature_speed(const PathSegment& seg, double from, double to) {
  const double span = to - from;
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    acc += kGlWeight[i] * seg.derivative(from + span * kGlNode[i]).norm();
  }
  return acc * span;
}

// Fits one cubic pair to `pts` with parameter i/(n-1), constrained to
// interpolate both endpoints. With four points this is exact interpolation.
PathSegment fit_chunk(std::span<const Waypoint> pts) {
  const std::size_t n = pts.size();
  PathSegment seg;
  const Vec2 p0 = pts.front();
  const Vec2 pn = pts.back();
  if (n == 2) {
    seg.cx = pn.x - p0.x;
    seg.cy = pn.y - p0.y;
    seg.dx = p0.x;
    seg.dy = p0.y;
    return seg;
  }
  // Endpoint constraints d = p0 and a + b + c + d = pn reduce the problem to
  // two free coefficients per axis:
  //   P(l) = p0 + (pn - p0) l^3 + b (l^2 - l^3) + c (l - l^3)
  const std::size_t m = n - 2;
  Eigen::MatrixXd basis(m, 2);
  Eigen::MatrixXd rhs(m, 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double l = static_cast<double>(i) / static_cast<double>(n - 1);
    const double l3 = l * l * l;
    basis(i - 1, 0) = l * l - l3;
    basis(i - 1, 1) = l - l3;
    rhs(i - 1, 0) = pts[i].x - p0.x - (pn.x - p0.x) * l3;
    rhs(i - 1, 1) = pts[i].y - p0.y - (pn.y - p0.y) * l3;
  }
  const Eigen::MatrixXd sol =
      basis.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  seg.bx = sol(0, 0);
  seg.cx = sol(1, 0);
  seg.by = sol(0, 1);
  seg.cy = sol(1, 1);
  seg.ax = (pn.x - p0.x) - seg.bx - seg.cx;
  seg.ay = (pn.y - p0.y) - seg.by - seg.cy;
  seg.dx = p0.x;
  seg.dy = p0.y;
  return seg;
}

}  // namespace

PlannedPath PlannedPath::fit(std::span<const Waypoint> waypoints, int points_per_segment) {
  if (points_per_segment < 4) {
    throw TooFewWaypoints("points_per_segment must be at least 4");
  }
  if (waypoints.size() < static_cast<std::size_t>(points_per_segment)) {
    throw TooFewWaypoints("need at least " + std::to_string(points_per_segment) +
                          " waypoints, got " + std::to_string(waypoints.size()));
  }
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if ((waypoints[i + 1] - waypoints[i]).norm() < 1e-12) {
      throw DuplicateWaypoint("consecutive duplicate waypoint at index " + std::to_string(i));
    }
    if (!waypoints[i].finite() || !waypoints[i + 1].finite()) {
      throw TooFewWaypoints("non-finite waypoint at index " + std::to_string(i));
    }
  }

  PlannedPath path;
  const std::size_t step = static_cast<std::size_t>(points_per_segment) - 1;
  const std::size_t last = waypoints.size() - 1;
  for (std::size_t start = 0; start < last; start += step) {
    const std::size_t end = std::min(start + step, last);
    path.segments_.push_back(fit_chunk(waypoints.subspan(start, end - start + 1)));
    path.knots_.push_back(waypoints[start]);
  }
  path.knots_.push_back(waypoints[last]);

  path.knot_arclength_.resize(path.knots_.size());
  path.knot_arclength_[0] = 0.0;
  for (std::size_t i = 0; i < path.segments_.size(); ++i) {
    path.knot_arclength_[i + 1] =
        path.knot_arclength_[i] + quadrature_speed(path.segments_[i], 0.0, 1.0);
  }
  return path;
}

double PlannedPath::segment_arclength(std::size_t seg, double lambda) const {
  return quadrature_speed(segments_[seg], 0.0, lambda);
}

PlannedPath::Location PlannedPath::locate(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::upper_bound(knot_arclength_.begin(), knot_arclength_.end(), s);
  std::size_t seg = static_cast<std::size_t>(
      std::clamp<std::ptrdiff_t>(it - knot_arclength_.begin() - 1, 0,
                                 static_cast<std::ptrdiff_t>(segments_.size()) - 1));
  const double target = s - knot_arclength_[seg];
  // Parametric speed is nonnegative, so arclength is monotone in lambda.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 48; ++i) {
    const double mid = 0.5 * (lo + hi);
    (segment_arclength(seg, mid) < target ? lo : hi) = mid;
  }
  return {seg, 0.5 * (lo + hi)};
}

Vec2 PlannedPath::point_at(double s) const {
  const Location loc = locate(s);
  return segments_[loc.segment].eval(loc.lambda);
}

PathFrame PlannedPath::frame_at(double s) const {
  const Location loc = locate(s);
  const PathSegment& seg = segments_[loc.segment];
  const Vec2 d1 = seg.derivative(loc.lambda);
  const Vec2 d2 = seg.second_derivative(loc.lambda);
  const double speed2 = d1.squared_norm();
  if (speed2 < 1e-12) {
    throw DegenerateTangent("vanishing tangent at s=" + std::to_string(s));
  }
  PathFrame f;
  f.point = seg.eval(loc.lambda);
  f.heading = std::atan2(d1.y, d1.x);
  f.curvature = d1.cross(d2) / (speed2 * std::sqrt(speed2));
  return f;
}

PathProjection PlannedPath::project_segments(const Vec2& position, std::size_t first,
                                             std::size_t last) const {
  constexpr int kCoarse = 50;
  std::size_t best_seg = first;
  double best_lambda = 0.0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t seg = first; seg <= last; ++seg) {
    for (int i = 0; i <= kCoarse; ++i) {
      const double l = static_cast<double>(i) / kCoarse;
      const double d2 = (segments_[seg].eval(l) - position).squared_norm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_seg = seg;
        best_lambda = l;
      }
    }
  }
  // Golden-section refinement inside the bracketing coarse interval.
  const PathSegment& seg = segments_[best_seg];
  double lo = std::max(0.0, best_lambda - 1.0 / kCoarse);
  double hi = std::min(1.0, best_lambda + 1.0 / kCoarse);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = (seg.eval(x1) - position).squared_norm();
  double f2 = (seg.eval(x2) - position).squared_norm();
  for (int i = 0; i < 60 && hi - lo > 1e-12; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = (seg.eval(x1) - position).squared_norm();
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = (seg.eval(x2) - position).squared_norm();
    }
  }
  PathProjection proj;
  proj.segment = best_seg;
  proj.lambda = 0.5 * (lo + hi);
  proj.point = seg.eval(proj.lambda);
  proj.s = knot_arclength_[best_seg] + segment_arclength(best_seg, proj.lambda);
  const Vec2 tangent = seg.derivative(proj.lambda).normalized();
  proj.lateral_offset = tangent.cross(position - proj.point);
  return proj;
}

PathProjection PlannedPath::project(const Vec2& position) const {
  return project_segments(position, 0, segments_.size() - 1);
}

PathProjection PlannedPath::project_near(const Vec2& position, double s_hint,
                                         double window) const {
  const double lo_s = std::clamp(s_hint - window, 0.0, length());
  const double hi_s = std::clamp(s_hint + window, 0.0, length());
  return project_segments(position, locate(lo_s).segment, locate(hi_s).segment);
}

std::vector<Waypoint> PlannedPath::sample_uniform(double s0, double s1, std::size_t count) const {
  std::vector<Waypoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double s = count > 1 ? s0 + (s1 - s0) * static_cast<double>(i) / (count - 1) : s0;
    out.push_back(point_at(s));
  }
  return out;
}

std::vector<Waypoint> parse_route(const std::string& text) {
  std::vector<Waypoint> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    double x = 0, y = 0;
    std::size_t used_x = 0, used_y = 0;
    bool ok = tokens.size() == 2;
    if (ok) {
      try {
        x = std::stod(tokens[0], &used_x);
        y = std::stod(tokens[1], &used_y);
      } catch (const std::exception&) {
        ok = false;
      }
      ok = ok && used_x == tokens[0].size() && used_y == tokens[1].size();
    }
    if (!ok) {
      throw ParseError("route line " + std::to_string(lineno) + ": expected 'x y'");
    }
    pts.push_back({x, y});
  }
  return pts;
}

std::vector<Waypoint> read_route_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open route file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_route(ss.str());
}

}  // namespace cca
