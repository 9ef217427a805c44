#pragma once

#include <span>
#include <string>
#include <vector>

#include "cca/geometry.hpp"

namespace cca {

/// One cubic segment X(l) = ax*l^3 + bx*l^2 + cx*l + dx (same for Y),
/// with the parameter l running over [0, 1].
struct PathSegment {
  double ax = 0, bx = 0, cx = 0, dx = 0;
  double ay = 0, by = 0, cy = 0, dy = 0;

  Vec2 eval(double lambda) const;
  Vec2 derivative(double lambda) const;
  Vec2 second_derivative(double lambda) const;
};

/// Evaluates a segment, rejecting parameters outside [0, 1].
Vec2 eval_segment(const PathSegment& seg, double lambda);

struct PathProjection {
  std::size_t segment = 0;
  double lambda = 0.0;
  double s = 0.0;              ///< arclength of the foot point
  double lateral_offset = 0.0; ///< signed, positive left of travel direction
  Vec2 point;                  ///< foot point on the path
};

struct PathFrame {
  Vec2 point;
  double heading = 0.0;   ///< radians CCW from +x
  double curvature = 0.0; ///< 1/m, positive turning left
};

/// A route as an ordered chain of cubic segments fitted to waypoints.
/// Immutable after construction; all queries are const and thread-safe.
class PlannedPath {
 public:
  PlannedPath() = default;

  /// Fits cubic segments to chunks of `points_per_segment` waypoints, adjacent
  /// chunks sharing their boundary waypoint. Each chunk is fitted by least
  /// squares constrained to interpolate its first and last waypoint.
  static PlannedPath fit(std::span<const Waypoint> waypoints, int points_per_segment = 4);

  bool empty() const { return segments_.empty(); }
  std::size_t segment_count() const { return segments_.size(); }
  const std::vector<PathSegment>& segments() const { return segments_; }
  const std::vector<Waypoint>& knots() const { return knots_; }
  /// Cumulative arclength at each knot (meters); front() == 0.
  const std::vector<double>& knot_arclength() const { return knot_arclength_; }
  double length() const { return knot_arclength_.empty() ? 0.0 : knot_arclength_.back(); }

  Vec2 point_at(double s) const;
  /// Heading and curvature at arclength s; throws DegenerateTangent when the
  /// parametric speed vanishes there.
  PathFrame frame_at(double s) const;

  /// Nearest point on the path: coarse scan (50 samples per segment) followed
  /// by golden-section refinement.
  PathProjection project(const Vec2& position) const;

  /// Same as project() but restricted to segments near arclength `s_hint`.
  PathProjection project_near(const Vec2& position, double s_hint, double window = 30.0) const;

  /// Uniformly spaced points over [s0, s1], both ends included.
  std::vector<Waypoint> sample_uniform(double s0, double s1, std::size_t count) const;

 private:
  struct Location {
    std::size_t segment;
    double lambda;
  };
  Location locate(double s) const;
  double segment_arclength(std::size_t seg, double lambda) const;  // from lambda=0
  PathProjection project_segments(const Vec2& position, std::size_t first, std::size_t last) const;

  std::vector<PathSegment> segments_;
  std::vector<Waypoint> knots_;
  std::vector<double> knot_arclength_;
};

/// Parses waypoints from route text: one "x y" pair per line, '#' comments.
std::vector<Waypoint> parse_route(const std::string& text);

/// Reads a route file from disk.
std::vector<Waypoint> read_route_file(const std::string& path);

}  // namespace cca
