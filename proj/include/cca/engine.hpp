#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cca/decision.hpp"
#include "cca/scenario.hpp"

namespace cca {

struct VehicleSnapshot {
  std::uint32_t id = 0;
  VehiclePose pose;
  double steer = 0.0;
  double accel = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();  ///< to any other vehicle
};

struct TickRecord {
  double t = 0.0;
  std::vector<VehicleSnapshot> vehicles;  ///< ego first, then remotes in id order
  DecisionMode mode = DecisionMode::LaneFollow;
  std::vector<DangerZone> zones;
  int delivered = 0;     ///< messages delivered across all receivers this tick
  double min_gap = std::numeric_limits<double>::infinity();  ///< ego vs. any other
  std::vector<Vec2> band_nodes;      ///< undeformed band nodes while avoiding
  std::vector<Vec2> deformed_nodes;  ///< deformed band nodes while avoiding
};

struct Metrics {
  bool collision_occurred = false;
  double min_gap = std::numeric_limits<double>::infinity();
  double max_lateral_accel = 0.0;
  std::optional<double> time_to_stop;
};

struct ObstacleDump {
  std::uint32_t id = 0;
  OrientedRect rect;  ///< remote footprint at its closest approach to the ego
};

struct SimulationTrace {
  std::string scenario_name;
  std::string mode_label;  ///< "v2x-on" or "v2x-off"
  double dt = 0.01;
  double lane_width = 3.5;
  double wheelbase = 2.7;
  std::vector<TickRecord> ticks;
  Metrics metrics;
  std::vector<Waypoint> ego_route_polyline;
  std::vector<ObstacleDump> obstacle_dumps;
  bool halted_early = false;
  double collision_time = -1.0;
};

struct RunOptions {
  std::optional<double> drop_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> preset_override;
  bool continue_after_collision = false;
  std::optional<std::string> frame_log_path;  ///< write raw BSM frames here
  std::optional<std::string> udp_endpoint;    ///< mirror frames to host:port
};

/// Runs the scenario tick by tick: deliver messages, decide, act, move,
/// detect collisions, publish. Deterministic for a fixed config and seed.
SimulationTrace run(const RuntimeScenario& scenario, const RunOptions& options = {});

/// Derives the terminal metrics from a trace.
Metrics compute_metrics(const SimulationTrace& trace);

struct ComparePair {
  SimulationTrace with_v2x;
  SimulationTrace without_v2x;
};

/// Runs the scenario twice with the same seed, differing only in the bus drop
/// probability (0 vs. 1).
ComparePair compare_modes(const RuntimeScenario& scenario, const RunOptions& options = {});

}  // namespace cca
