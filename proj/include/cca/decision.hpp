#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cca/elastic_band.hpp"
#include "cca/path.hpp"
#include "cca/v2v.hpp"

namespace cca {

enum class DecisionMode { LaneFollow, AdaptSpeed, Avoid, EmergencyBrake, WaitAtIntersection };

const char* to_string(DecisionMode mode);
std::optional<DecisionMode> decision_mode_from_string(const std::string& name);

/// Longitudinal interval an adjacent vehicle occupies or will occupy during
/// the ego maneuver, in road (arclength) coordinates.
struct DangerZone {
  double lo = 0.0;
  double hi = 0.0;
  std::uint32_t source_vehicle = 0;
};

/// x2 = x1 + (v_adj - v_ego) * t_maneuver + x_safety; the zone is the interval
/// hull of x1 and x2, covering same-direction and oncoming adjacent traffic.
DangerZone danger_zone(double x1, double v_adj, double v_ego, double t_maneuver, double x_safety,
                       std::uint32_t source_vehicle = 0);

/// Inclusive containment; boundary positions count as inside.
bool in_danger_zone(const DangerZone& zone, double ego_s);

/// Maneuver-duration estimate. With an active band window: window length over
/// ego speed. Otherwise 2 * lateral_excursion * k_preset / v_ego. Both clamped
/// to [1, 10] s. Throws EgoTooSlow when v_ego <= 0.1.
double estimate_t_maneuver(double lateral_excursion, double v_ego, double k_preset,
                           std::optional<double> active_window_length = std::nullopt);

/// True when the ego can traverse the conflict region without its occupancy
/// interval (widened by margin) overlapping the crossing vehicle's predicted
/// one. Throws StaleBsm when the crossing record is older than 0.5 s.
bool intersection_clearance(const PlannedPath& ego_turn_path, double ego_s, double ego_speed,
                            const BsmRecord& crossing, double now, const ObstacleDisk& region,
                            double margin);

/// One remote vehicle as seen through its latest BSM, projected onto the
/// ego's original route.
struct PerceivedVehicle {
  std::uint32_t id = 0;
  Vec2 position;
  double speed = 0.0;
  double heading = 0.0;
  bool brake_flag = false;
  double s = 0.0;        ///< arclength of the vehicle center on the ego route
  double lateral = 0.0;  ///< signed lateral offset from the ego route
  double v_along = 0.0;  ///< speed component along the ego travel direction
  double half_length = 2.25;
};

struct IntersectionContext {
  ObstacleDisk region;
  BsmRecord crossing;
  double region_entry_s = 0.0;  ///< ego arclength where the turn path enters the region
  double now = 0.0;             ///< simulation time of this snapshot, s
  const PlannedPath* ego_path = nullptr;  ///< ego turn path; owned by the engine
};

struct Perception {
  std::vector<PerceivedVehicle> vehicles;
  std::optional<IntersectionContext> intersection;
};

struct DecisionParams {
  double x_safety = 10.0;                     ///< m, danger-zone padding
  std::optional<double> t_maneuver_override;  ///< s, scenario override
  double t_maneuver_k = 3.0;                  ///< preset factor for the fallback estimate
  double lateral_excursion = 3.5;             ///< m, assumed maneuver amplitude
  double eebl_range = 150.0;                  ///< m, brake-flag reaction range
  double avoid_trigger_range = 45.0;          ///< m, obstacle distance that warrants a maneuver
  double slow_obstacle_margin = 3.0;          ///< m/s below cruise that makes a vehicle an obstacle
  double zone_start_margin = 5.0;             ///< m, zones are widened by this before gating a
                                              ///< maneuver start (the recorded zones stay literal)
  double merge_threshold = 0.05;              ///< m, deformation below this counts as merged back
  double intersection_margin = 1.0;           ///< s
  double approach_range = 30.0;               ///< m before the conflict region to start gating
  double stop_margin = 7.0;                   ///< m short of the conflict region to hold
  double standoff_gap = 8.0;                  ///< m, bumper gap kept behind a slower vehicle
  double comfort_decel = 2.0;                 ///< m/s^2 for approach speed profiles
};

struct Directives {
  double target_speed = 0.0;
  bool use_deformed_path = false;
  bool brake_hard = false;
};

struct DecisionState {
  DecisionMode mode = DecisionMode::LaneFollow;
  double target_speed = 0.0;
  bool has_deformed_path = false;
  std::vector<DangerZone> active_zones;
};

/// Ego quantities the decision step needs each tick.
struct EgoContext {
  double s_front = 0.0;   ///< front-bumper arclength on the original route
  double speed = 0.0;
  double lane_width = 3.5;
  double cruise_speed = 0.0;
  double path_length = 0.0;
  std::optional<double> active_window_length;  ///< band extent while avoiding
  bool deformation_merged = false;             ///< deformed path within 5 cm of original ahead
};

/// Advances the decision state machine one tick. Deterministic and total over
/// every (mode, perception) combination.
std::pair<DecisionState, Directives> step_fsm(const DecisionState& state,
                                              const Perception& perception, const EgoContext& ego,
                                              const DecisionParams& params);

}  // namespace cca
