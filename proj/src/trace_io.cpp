#include "cca/trace_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cca/errors.hpp"

namespace cca {

using nlohmann::json;

namespace {

std::string format_gap(double gap) {
  if (!std::isfinite(gap)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", gap);
  return buf;
}

}  // namespace

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw Error("cannot open trace output: " + path);
  std::fputs("time_s,vehicle_id,x_m,y_m,heading_rad,speed_mps,steer_rad,accel_mps2,mode,min_gap_m\n",
             f);
  for (const TickRecord& tick : trace.ticks) {
    for (const VehicleSnapshot& v : tick.vehicles) {
      const char* mode = v.id == 1 ? to_string(tick.mode) : "remote";
      std::fprintf(f, "%.3f,%" PRIu32 ",%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%s\n", tick.t, v.id,
                   v.pose.x, v.pose.y, v.pose.heading, v.pose.speed, v.steer, v.accel, mode,
                   format_gap(v.min_gap).c_str());
    }
  }
  std::fclose(f);
}

namespace {

json metrics_to_json(const Metrics& m) {
  json out;
  out["collision_occurred"] = m.collision_occurred;
  out["min_gap_m"] = std::isfinite(m.min_gap) ? json(m.min_gap) : json(nullptr);
  out["max_lateral_accel_mps2"] = m.max_lateral_accel;
  out["time_to_stop_s"] = m.time_to_stop ? json(*m.time_to_stop) : json(nullptr);
  return out;
}

json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const Vec2& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

}  // namespace

void write_trace_json(const SimulationTrace& trace, const std::string& path) {
  json doc;
  doc["scenario"] = trace.scenario_name;
  doc["mode"] = trace.mode_label;
  doc["dt_s"] = trace.dt;
  doc["lane_width_m"] = trace.lane_width;
  doc["halted_early"] = trace.halted_early;
  doc["collision_time_s"] =
      trace.collision_time >= 0.0 ? json(trace.collision_time) : json(nullptr);
  doc["metrics"] = metrics_to_json(trace.metrics);
  doc["ego_route"] = points_to_json(trace.ego_route_polyline);

  json ticks = json::array();
  for (const TickRecord& tick : trace.ticks) {
    json t;
    t["t"] = tick.t;
    t["mode"] = to_string(tick.mode);
    json zones = json::array();
    for (const DangerZone& z : tick.zones) zones.push_back({z.lo, z.hi, z.source_vehicle});
    t["zones"] = zones;
    ticks.push_back(std::move(t));
  }
  doc["ticks"] = std::move(ticks);

  // Deformed-path node dumps, one per Avoid interval at peak deformation.
  json dumps = json::array();
  bool in_avoid = false;
  double best_amplitude = -1.0;
  json best_nodes;
  double interval_start = 0.0;
  const auto flush = [&](double t_end) {
    if (best_amplitude >= 0.0) {
      json d;
      d["from_s"] = interval_start;
      d["to_s"] = t_end;
      d["deformed_nodes"] = best_nodes;
      dumps.push_back(std::move(d));
    }
    best_amplitude = -1.0;
  };
  for (const TickRecord& tick : trace.ticks) {
    const bool avoiding = tick.mode == DecisionMode::Avoid && !tick.deformed_nodes.empty();
    if (avoiding && !in_avoid) {
      in_avoid = true;
      interval_start = tick.t;
    }
    if (!avoiding && in_avoid) {
      in_avoid = false;
      flush(tick.t);
    }
    if (avoiding) {
      double amplitude = 0.0;
      for (std::size_t i = 0; i < tick.band_nodes.size(); ++i) {
        amplitude = std::max(amplitude, (tick.deformed_nodes[i] - tick.band_nodes[i]).norm());
      }
      if (amplitude > best_amplitude) {
        best_amplitude = amplitude;
        best_nodes = points_to_json(tick.deformed_nodes);
      }
    }
  }
  if (in_avoid) flush(trace.ticks.back().t);
  doc["avoid_intervals"] = std::move(dumps);

  json obstacles = json::array();
  for (const ObstacleDump& dump : trace.obstacle_dumps) {
    json o;
    o["id"] = dump.id;
    json corners = json::array();
    for (const Vec2& c : dump.rect.corners) corners.push_back({c.x, c.y});
    o["corners"] = corners;
    obstacles.push_back(std::move(o));
  }
  doc["obstacles"] = std::move(obstacles);

  std::ofstream out(path);
  if (!out) throw Error("cannot open trace sidecar output: " + path);
  out << doc.dump(1, '\t') << "\n";
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace file is empty: " + path);
  if (line.rfind("time_s,vehicle_id", 0) != 0) {
    throw ParseError("not a trace CSV (unexpected header): " + path);
  }
  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 10) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 10 fields");
    }
    try {
      TraceRow row;
      row.t = std::stod(fields[0]);
      row.vehicle_id = static_cast<std::uint32_t>(std::stoul(fields[1]));
      row.x = std::stod(fields[2]);
      row.y = std::stod(fields[3]);
      row.heading = std::stod(fields[4]);
      row.speed = std::stod(fields[5]);
      row.steer = std::stod(fields[6]);
      row.accel = std::stod(fields[7]);
      row.mode = fields[8];
      row.min_gap = fields[9] == "inf" ? std::numeric_limits<double>::infinity()
                                       : std::stod(fields[9]);
      rows.push_back(row);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": malformed numeric field");
    }
  }
  return rows;
}

TraceSidecar read_trace_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace sidecar: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("corrupt trace sidecar " + path + ": " + e.what());
  }
  TraceSidecar side;
  try {
    side.scenario_name = doc.at("scenario").get<std::string>();
    side.mode_label = doc.at("mode").get<std::string>();
    for (const auto& p : doc.at("ego_route")) {
      side.ego_route.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    for (const auto& interval : doc.at("avoid_intervals")) {
      std::vector<Vec2> nodes;
      for (const auto& p : interval.at("deformed_nodes")) {
        nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      side.deformed_dumps.push_back(std::move(nodes));
    }
    for (const auto& o : doc.at("obstacles")) {
      ObstacleDump dump;
      dump.id = o.at("id").get<std::uint32_t>();
      const auto& corners = o.at("corners");
      for (std::size_t i = 0; i < 4; ++i) {
        dump.rect.corners[i] = {corners.at(i).at(0).get<double>(),
                                corners.at(i).at(1).get<double>()};
      }
      side.obstacles.push_back(std::move(dump));
    }
    const auto& m = doc.at("metrics");
    side.metrics.collision_occurred = m.at("collision_occurred").get<bool>();
    side.metrics.min_gap = m.at("min_gap_m").is_null()
                               ? std::numeric_limits<double>::infinity()
                               : m.at("min_gap_m").get<double>();
    side.metrics.max_lateral_accel = m.at("max_lateral_accel_mps2").get<double>();
    if (!m.at("time_to_stop_s").is_null()) {
      side.metrics.time_to_stop = m.at("time_to_stop_s").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError("trace sidecar " + path + " is missing fields: " + e.what());
  }
  return side;
}

}  // namespace cca
