#pragma once

#include <span>
#include <vector>

#include "cca/path.hpp"

namespace cca {

/// Disk obstacle: a vehicle footprint collapsed to its center plus an
/// inflation radius. Distances are measured to the disk boundary.
struct ObstacleDisk {
  Vec2 center;
  double radius = 0.0;
};

/// Spring/force parameters plus the window configuration used when a band is
/// cut out of a planned path.
struct BandParams {
  double ks = 1.0;             ///< spring constant between nodes
  double ke = 1.0;             ///< external force stiffness
  double r0 = 4.7;             ///< force threshold distance, m
  double node_spacing = 1.0;   ///< m
  double window_length = 40.0; ///< m, band extent ahead of the ego
  double window_tail = 12.0;   ///< m, band extent kept behind the ego so the
                               ///< path stays deformed while passing
  int max_force_iterations = 1;     ///< 1 = single linear solve
  double iteration_tol = 0.01;      ///< m, stop when nodes move less than this
};

/// A window of path nodes joined by elastic strings. First and last node are
/// pinned to the original path.
struct ElasticBand {
  std::vector<Vec2> nodes;
  double ks = 1.0;
  double ke = 1.0;
  double r0 = 1.0;
  double s_start = 0.0;  ///< arclength of the first node on the source path
  double s_end = 0.0;    ///< arclength of the last node
};

/// Per-node displacements; endpoints are exactly zero.
struct DisplacementField {
  std::vector<Vec2> u;
};

/// Samples band nodes at uniform arclength over [s_start, s_end].
/// Throws WindowTooSmall when fewer than three nodes fit.
ElasticBand build_band(const PlannedPath& path, double s_start, double s_end,
                       const BandParams& params);

/// Dense interior stiffness matrix: 2 on the diagonal, -1 off it.
std::vector<std::vector<double>> stiffness_matrix(int n_interior);

/// Repulsive force on a single node from one obstacle. Zero beyond r0, and
/// ke*(r0 - d) toward the node inside, where d is the distance between node
/// and disk boundary. Throws NodeInsideObstacle when d <= 0.
Vec2 obstacle_force(const Vec2& node, const ObstacleDisk& obstacle, double ke, double r0);

/// Sum of obstacle forces for every band node (endpoints included; the solver
/// ignores them).
std::vector<Vec2> external_forces(const ElasticBand& band, std::span<const ObstacleDisk> obstacles);

/// Solves K u = F / ks for the interior nodes with the Thomas algorithm,
/// independently per axis. Endpoint displacements are exactly zero.
DisplacementField solve_displacements(const ElasticBand& band, std::span<const Vec2> forces);

/// Node positions plus displacements. Throws LengthMismatch.
std::vector<Vec2> deform(const ElasticBand& band, const DisplacementField& u);

struct DeformResult {
  PlannedPath path;                  ///< path to follow in place of the original
  std::vector<Vec2> band_nodes;      ///< undeformed node positions
  std::vector<Vec2> deformed_nodes;  ///< nodes after displacement
  double s_start = 0.0;
  double s_end = 0.0;
  bool deformed = false;  ///< false when no obstacle was in range
};

/// Full pipeline: band from the window ahead of ego_s, forces, displacement
/// solve, and a refit path through the deformed nodes. When no obstacle is
/// within r0 of any node the original path is returned untouched.
DeformResult deform_path(const PlannedPath& path, double ego_s,
                         std::span<const ObstacleDisk> obstacles, const BandParams& params);

}  // namespace cca
