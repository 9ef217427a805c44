#pragma once

#include <string>
#include <vector>

#include "cca/engine.hpp"

namespace cca {

/// Writes the per-tick, per-vehicle CSV with the fixed header
///   time_s,vehicle_id,x_m,y_m,heading_rad,speed_mps,steer_rad,accel_mps2,mode,min_gap_m
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

/// Writes the JSON sidecar: metrics, the ego route polyline, per-tick decision
/// modes and danger zones, deformed-path node dumps per Avoid interval, and
/// remote footprints at their closest approach.
void write_trace_json(const SimulationTrace& trace, const std::string& path);

/// One CSV row read back from a trace file.
struct TraceRow {
  double t = 0.0;
  std::uint32_t vehicle_id = 0;
  double x = 0.0, y = 0.0, heading = 0.0, speed = 0.0, steer = 0.0, accel = 0.0;
  std::string mode;
  double min_gap = 0.0;
};

/// Reads a trace CSV back; throws ParseError on malformed input.
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Sidecar content needed by the plot-data commands.
struct TraceSidecar {
  std::string scenario_name;
  std::string mode_label;
  std::vector<Waypoint> ego_route;
  std::vector<std::vector<Vec2>> deformed_dumps;
  std::vector<ObstacleDump> obstacles;
  Metrics metrics;
};

TraceSidecar read_trace_json(const std::string& path);

}  // namespace cca
