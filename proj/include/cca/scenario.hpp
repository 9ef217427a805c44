#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cca/decision.hpp"
#include "cca/elastic_band.hpp"
#include "cca/path.hpp"
#include "cca/tracking.hpp"
#include "cca/v2v.hpp"
#include "cca/vehicle.hpp"

namespace cca {

/// One remote vehicle as written in a scenario file. Exactly one of `lane`
/// and `route` must be set; `x` is the start position along it (x coordinate
/// for lanes, arclength for routes). Negative speed on a lane means traveling
/// against the ego direction.
struct RemoteSpec {
  std::string behavior;
  std::string params;  ///< behavior-specific, e.g. "t0 decel" for hard_brake_at
  std::optional<double> lane;
  std::optional<std::string> route;
  double x = 0.0;
  double speed = 0.0;
};

struct EgoSpec {
  std::string route_file;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;  ///< initial and cruise speed
  std::string preset = "default";
  std::optional<double> t_maneuver_s;
  double x_safety_m = 10.0;
};

/// Parsed scenario file, prior to route resolution.
struct ScenarioConfig {
  std::string name;
  std::string description;  ///< first comment line of the file
  double duration_s = 0.0;
  double dt_s = 0.01;
  double lane_width_m = 3.5;
  BusConfig bus;
  EgoSpec ego;
  std::vector<RemoteSpec> remotes;
  std::optional<ObstacleDisk> intersection;
};

/// Band/decision knobs bundled under a preset name.
struct ScenarioTuning {
  BandParams band;
  double t_maneuver_k = 3.0;
  double obstacle_radius = 1.1;  ///< disk radius wrapped around remote vehicles
};

/// "default", "fast" (quicker lane change, less comfort) or "smooth".
std::optional<ScenarioTuning> tuning_preset(const std::string& name);

struct RuntimeVehicle {
  std::uint32_t id = 0;
  PlannedPath route;
  BehaviorProfile profile;
  VehiclePose initial;
};

/// Fully resolved scenario, ready to run.
struct RuntimeScenario {
  ScenarioConfig config;
  PlannedPath ego_route;
  VehiclePose ego_initial;
  std::vector<RuntimeVehicle> remotes;
  ScenarioTuning tuning;
  TrackingGains gains;
  DecisionParams decision;
  VehicleParams vehicle;
  double region_entry_s = -1.0;  ///< ego arclength entering the conflict region
};

/// Looks up route files by name; returns the file content.
using AssetResolver = std::function<std::optional<std::string>(const std::string& name)>;

/// Parses scenario text against the strict schema. Unknown sections or keys
/// raise ParseError naming them with their line; semantic violations are
/// collected into a single ValidationError.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name);

/// Resolves routes, builds initial poses, and validates the assembled
/// scenario (collision-free initial poses, routes long enough, preset known).
RuntimeScenario resolve_scenario(const ScenarioConfig& config, const AssetResolver& resolver);

/// Loads a scenario from disk; route files resolve relative to the scenario
/// file's directory, falling back to the embedded assets.
RuntimeScenario load_scenario(const std::string& path);

/// Loads one of the shipped scenarios by name ("eebl", "ima", ...).
RuntimeScenario load_embedded_scenario(const std::string& name);

struct ScenarioListing {
  std::string name;
  std::string description;
  bool embedded = true;
  std::string path;  ///< empty for embedded entries
};

/// All shipped scenario names with their one-line descriptions.
std::vector<ScenarioListing> list_embedded_scenarios();

}  // namespace cca
