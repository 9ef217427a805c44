#include "cca/elastic_band.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cca/errors.hpp"

namespace cca {

ElasticBand build_band(const PlannedPath& path, double s_start, double s_end,
                       const BandParams& params) {
  if (params.node_spacing <= 0.0) throw WindowTooSmall("node_spacing must be positive");
  const double len = s_end - s_start;
  const std::size_t count =
      static_cast<std::size_t>(std::ceil(len / params.node_spacing - 1e-9)) + 1;
  if (len <= 0.0 || count < 3) {
    throw WindowTooSmall("window [" + std::to_string(s_start) + ", " + std::to_string(s_end) +
                         "] yields fewer than 3 nodes at spacing " +
                         std::to_string(params.node_spacing));
  }
  ElasticBand band;
  band.nodes = path.sample_uniform(s_start, s_end, count);
  band.ks = params.ks;
  band.ke = params.ke;
  band.r0 = params.r0;
  band.s_start = s_start;
  band.s_end = s_end;
  return band;
}

std::vector<std::vector<double>> stiffness_matrix(int n_interior) {
  std::vector<std::vector<double>> k(n_interior, std::vector<double>(n_interior, 0.0));
  for (int i = 0; i < n_interior; ++i) {
    k[i][i] = 2.0;
    if (i > 0) k[i][i - 1] = -1.0;
    if (i + 1 < n_interior) k[i][i + 1] = -1.0;
  }
  return k;
}

Vec2 obstacle_force(const Vec2& node, const ObstacleDisk& obstacle, double ke, double r0) {
  const Vec2 r = node - obstacle.center;
  const double center_dist = r.norm();
  const double d = center_dist - obstacle.radius;
  if (d <= 0.0) {
    throw NodeInsideObstacle("band node at (" + std::to_string(node.x) + ", " +
                             std::to_string(node.y) + ") lies inside an obstacle");
  }
  if (d > r0) return {0.0, 0.0};
  return -ke * (d - r0) * (r / center_dist);
}

std::vector<Vec2> external_forces(const ElasticBand& band,
                                  std::span<const ObstacleDisk> obstacles) {
  std::vector<Vec2> forces(band.nodes.size());
  for (std::size_t i = 0; i < band.nodes.size(); ++i) {
    for (const ObstacleDisk& obs : obstacles) {
      forces[i] += obstacle_force(band.nodes[i], obs, band.ke, band.r0);
    }
  }
  return forces;
}

namespace {

// Thomas algorithm specialized to the (-1, 2, -1) interior stiffness matrix.
void solve_tridiagonal(std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  if (n == 0) return;
  std::vector<double> diag(n, 2.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double w = -1.0 / diag[i - 1];
    diag[i] -= w * -1.0;
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = (rhs[i] + rhs[i + 1]) / diag[i];
  }
}

}  // namespace

DisplacementField solve_displacements(const ElasticBand& band, std::span<const Vec2> forces) {
  if (forces.size() != band.nodes.size()) {
    throw LengthMismatch("force count " + std::to_string(forces.size()) +
                         " does not match node count " + std::to_string(band.nodes.size()));
  }
  const std::size_t n = band.nodes.size();
  DisplacementField field;
  field.u.assign(n, Vec2{0.0, 0.0});
  if (n < 3) return field;
  const std::size_t interior = n - 2;
  std::vector<double> fx(interior), fy(interior);
  for (std::size_t i = 0; i < interior; ++i) {
    fx[i] = forces[i + 1].x / band.ks;
    fy[i] = forces[i + 1].y / band.ks;
  }
  solve_tridiagonal(fx);
  solve_tridiagonal(fy);
  for (std::size_t i = 0; i < interior; ++i) {
    field.u[i + 1] = {fx[i], fy[i]};
  }
  return field;
}

std::vector<Vec2> deform(const ElasticBand& band, const DisplacementField& u) {
  if (u.u.size() != band.nodes.size()) {
    throw LengthMismatch("displacement count " + std::to_string(u.u.size()) +
                         " does not match node count " + std::to_string(band.nodes.size()));
  }
  std::vector<Vec2> out(band.nodes.size());
  for (std::size_t i = 0; i < band.nodes.size(); ++i) {
    out[i] = band.nodes[i] + u.u[i];
  }
  return out;
}

DeformResult deform_path(const PlannedPath& path, double ego_s,
                         std::span<const ObstacleDisk> obstacles, const BandParams& params) {
  const double s0 = std::clamp(ego_s - params.window_tail, 0.0, path.length());
  const double s1 = std::min(std::clamp(ego_s, 0.0, path.length()) + params.window_length,
                             path.length());
  ElasticBand band = build_band(path, s0, s1, params);

  DisplacementField field;
  field.u.assign(band.nodes.size(), Vec2{0.0, 0.0});
  const ElasticBand original = band;
  for (int iter = 0; iter < std::max(1, params.max_force_iterations); ++iter) {
    ElasticBand probe = original;
    for (std::size_t i = 0; i < probe.nodes.size(); ++i) probe.nodes[i] += field.u[i];
    const std::vector<Vec2> forces = external_forces(probe, obstacles);
    const DisplacementField next = solve_displacements(original, forces);
    double max_move = 0.0;
    for (std::size_t i = 0; i < next.u.size(); ++i) {
      max_move = std::max(max_move, (next.u[i] - field.u[i]).norm());
    }
    field = next;
    if (max_move < params.iteration_tol) break;
  }

  DeformResult result;
  result.band_nodes = original.nodes;
  result.s_start = s0;
  result.s_end = s1;
  result.deformed_nodes = deform(original, field);
  double max_u = 0.0;
  for (const Vec2& u : field.u) max_u = std::max(max_u, u.norm());
  if (max_u == 0.0) {
    result.path = path;
    result.deformed = false;
    return result;
  }

  // Reassemble the full route: resampled original before and after the
  // window, deformed nodes inside it, then refit.
  std::vector<Waypoint> pts;
  if (s0 > params.node_spacing * 0.5) {
    const std::size_t n_pre = std::max<std::size_t>(1, std::llround(s0 / params.node_spacing));
    for (std::size_t k = 0; k < n_pre; ++k) {
      pts.push_back(path.point_at(s0 * static_cast<double>(k) / static_cast<double>(n_pre)));
    }
  }
  pts.insert(pts.end(), result.deformed_nodes.begin(), result.deformed_nodes.end());
  const double tail = path.length() - s1;
  if (tail > params.node_spacing * 0.5) {
    const std::size_t n_post = std::max<std::size_t>(1, std::llround(tail / params.node_spacing));
    for (std::size_t k = 1; k <= n_post; ++k) {
      pts.push_back(path.point_at(s1 + tail * static_cast<double>(k) / static_cast<double>(n_post)));
    }
  }
  result.path = PlannedPath::fit(pts, 4);
  result.deformed = true;
  return result;
}

}  // namespace cca
