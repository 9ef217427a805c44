#include "cca/plotdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>

#include "cca/errors.hpp"
#include "cca/trace_io.hpp"

namespace cca {

namespace {

std::string sidecar_path(const std::string& trace_csv) {
  const auto dot = trace_csv.rfind('.');
  return (dot == std::string::npos ? trace_csv : trace_csv.substr(0, dot)) + ".json";
}

// Arc position of a point along a polyline, by nearest-segment projection.
double polyline_arc_position(const std::vector<Waypoint>& line, const Vec2& p) {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const Vec2 a = line[i];
    const Vec2 ab = line[i + 1] - a;
    const double len = ab.norm();
    const double t = len > 0.0 ? std::clamp((p - a).dot(ab) / (len * len), 0.0, 1.0) : 0.0;
    const Vec2 foot = a + ab * t;
    const double d2 = (p - foot).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s + t * len;
    }
    s += len;
  }
  return best_s;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_displacement_time(const std::vector<TraceRow>& rows, const TraceSidecar& side,
                             const std::string& out_csv) {
  if (side.ego_route.size() < 2) throw ParseError("sidecar carries no usable ego route");
  std::vector<std::uint32_t> ids;
  for (const TraceRow& row : rows) {
    if (std::find(ids.begin(), ids.end(), row.vehicle_id) == ids.end()) {
      ids.push_back(row.vehicle_id);
    }
  }
  std::sort(ids.begin(), ids.end());

  FilePtr f(std::fopen(out_csv.c_str(), "w"));
  if (!f) throw Error("cannot open plot output: " + out_csv);
  std::fprintf(f.get(), "time_s");
  for (std::uint32_t id : ids) std::fprintf(f.get(), ",s_%u", id);
  std::fprintf(f.get(), "\n");

  std::map<std::uint32_t, double> current;
  double t = rows.front().t;
  const auto flush = [&] {
    std::fprintf(f.get(), "%.3f", t);
    for (std::uint32_t id : ids) std::fprintf(f.get(), ",%.6f", current[id]);
    std::fprintf(f.get(), "\n");
  };
  for (const TraceRow& row : rows) {
    if (row.t != t) {
      flush();
      t = row.t;
    }
    current[row.vehicle_id] = polyline_arc_position(side.ego_route, {row.x, row.y});
  }
  flush();
}

void write_path_xy(const std::vector<TraceRow>& rows, const TraceSidecar& side,
                   const std::string& out_csv) {
  FilePtr f(std::fopen(out_csv.c_str(), "w"));
  if (!f) throw Error("cannot open plot output: " + out_csv);
  std::fprintf(f.get(), "series,x_m,y_m\n");
  for (const Waypoint& w : side.ego_route) {
    std::fprintf(f.get(), "original_path,%.6f,%.6f\n", w.x, w.y);
  }
  for (std::size_t k = 0; k < side.deformed_dumps.size(); ++k) {
    for (const Vec2& p : side.deformed_dumps[k]) {
      std::fprintf(f.get(), "deformed_path_%zu,%.6f,%.6f\n", k + 1, p.x, p.y);
    }
  }
  for (const ObstacleDump& dump : side.obstacles) {
    for (std::size_t i = 0; i <= 4; ++i) {  // closed loop
      const Vec2& c = dump.rect.corners[i % 4];
      std::fprintf(f.get(), "obstacle_%u,%.6f,%.6f\n", dump.id, c.x, c.y);
    }
  }
  for (const TraceRow& row : rows) {
    if (row.vehicle_id == 1) {
      std::fprintf(f.get(), "ego_driven,%.6f,%.6f\n", row.x, row.y);
    }
  }
}

}  // namespace

void write_plot_data(const std::string& trace_csv, const std::string& kind,
                     const std::string& out_csv) {
  if (kind != "displacement-time" && kind != "path-xy") {
    throw UnknownKind("unknown plot kind '" + kind + "' (displacement-time | path-xy)");
  }
  const std::vector<TraceRow> rows = read_trace_csv(trace_csv);
  if (rows.empty()) throw ParseError("trace has no data rows: " + trace_csv);
  const TraceSidecar side = read_trace_json(sidecar_path(trace_csv));
  if (kind == "displacement-time") {
    write_displacement_time(rows, side, out_csv);
  } else {
    write_path_xy(rows, side, out_csv);
  }
}

}  // namespace cca
