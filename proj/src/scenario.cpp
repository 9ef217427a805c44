#include "cca/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cca/errors.hpp"
#include "cca/scenario_assets.hpp"

namespace cca {

namespace {

struct KeyValue {
  std::string value;
  std::size_t line = 0;
  bool quoted = false;
  bool used = false;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, KeyValue> entries;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

struct ParsedFile {
  std::string description;
  std::vector<Section> sections;
};

ParsedFile tokenize(const std::string& text, const std::string& source) {
  ParsedFile out;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  Section* current = nullptr;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string full = trim(raw);
    if (!full.empty() && full[0] == '#') {
      if (out.description.empty() && out.sections.empty()) {
        out.description = trim(full.substr(1));
      }
      continue;
    }
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      const bool repeated = line.size() > 1 && line[1] == '[';
      const std::string close = repeated ? "]]" : "]";
      if (line.substr(line.size() - close.size()) != close) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": malformed section header '" +
                         line + "'");
      }
      const std::string name =
          trim(line.substr(repeated ? 2 : 1, line.size() - 2 * (repeated ? 2 : 1)));
      if (name.empty()) {
        throw ParseError(source + ":" + std::to_string(lineno) + ": empty section name");
      }
      out.sections.push_back({(repeated ? "[]" : "") + name, lineno, {}});
      current = &out.sections.back();
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value', got '" +
                       line + "'");
    }
    if (current == nullptr) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    bool quoted = false;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      quoted = true;
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty() || (value.empty() && !quoted)) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": malformed 'key = value' line");
    }
    if (current->entries.count(key) != 0) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    current->entries[key] = {value, lineno, quoted, false};
  }
  return out;
}

class SectionReader {
 public:
  SectionReader(Section& section, const std::string& source, std::vector<std::string>& violations)
      : section_(section), source_(source), violations_(violations) {}

  std::optional<double> number(const std::string& key) {
    KeyValue* kv = find(key);
    if (kv == nullptr) return std::nullopt;
    try {
      std::size_t used = 0;
      const double v = std::stod(kv->value, &used);
      if (used != kv->value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      violations_.push_back(where(*kv) + ": value of '" + key + "' is not a number: '" +
                            kv->value + "'");
      return std::nullopt;
    }
  }

  std::optional<std::uint64_t> integer(const std::string& key) {
    KeyValue* kv = find(key);
    if (kv == nullptr) return std::nullopt;
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(kv->value, &used);
      if (used != kv->value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      violations_.push_back(where(*kv) + ": value of '" + key + "' is not an integer: '" +
                            kv->value + "'");
      return std::nullopt;
    }
  }

  std::optional<std::string> string(const std::string& key) {
    KeyValue* kv = find(key);
    if (kv == nullptr) return std::nullopt;
    return kv->value;
  }

  void require(const std::string& key) {
    if (section_.entries.count(key) == 0) {
      violations_.push_back(source_ + ": section [" + display_name() + "] is missing key '" + key +
                            "'");
    }
  }

  // Every key must have been consumed by one of the accessors above.
  void reject_unknown() const {
    for (const auto& [key, kv] : section_.entries) {
      if (!kv.used) {
        throw ParseError(where(kv) + ": unknown key '" + key + "' in section [" + display_name() +
                         "]");
      }
    }
  }

 private:
  KeyValue* find(const std::string& key) {
    auto it = section_.entries.find(key);
    if (it == section_.entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  std::string where(const KeyValue& kv) const { return source_ + ":" + std::to_string(kv.line); }
  std::string display_name() const {
    return section_.name.rfind("[]", 0) == 0 ? section_.name.substr(2) : section_.name;
  }

  Section& section_;
  const std::string& source_;
  std::vector<std::string>& violations_;
};

void throw_if_violations(const std::vector<std::string>& violations) {
  if (violations.empty()) return;
  std::string msg = "scenario validation failed:";
  for (const std::string& v : violations) msg += "\n  - " + v;
  throw ValidationError(msg);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name) {
  ParsedFile file = tokenize(text, source_name);
  ScenarioConfig cfg;
  cfg.description = file.description;
  std::vector<std::string> violations;

  bool saw_scenario = false, saw_ego = false;
  for (Section& section : file.sections) {
    SectionReader reader(section, source_name, violations);
    if (section.name == "scenario") {
      saw_scenario = true;
      reader.require("name");
      reader.require("duration_s");
      if (auto v = reader.string("name")) cfg.name = *v;
      if (auto v = reader.number("duration_s")) cfg.duration_s = *v;
      if (auto v = reader.number("dt_s")) cfg.dt_s = *v;
      if (auto v = reader.number("lane_width_m")) cfg.lane_width_m = *v;
    } else if (section.name == "bus") {
      if (auto v = reader.number("rate_hz")) cfg.bus.rate_hz = *v;
      if (auto v = reader.number("latency_s")) cfg.bus.latency = *v;
      if (auto v = reader.number("drop_probability")) cfg.bus.drop_probability = *v;
      if (auto v = reader.integer("seed")) cfg.bus.rng_seed = *v;
    } else if (section.name == "ego") {
      saw_ego = true;
      reader.require("route_file");
      reader.require("speed");
      if (auto v = reader.string("route_file")) cfg.ego.route_file = *v;
      if (auto v = reader.number("x")) cfg.ego.x = *v;
      if (auto v = reader.number("y")) cfg.ego.y = *v;
      if (auto v = reader.number("heading")) cfg.ego.heading = *v;
      if (auto v = reader.number("speed")) cfg.ego.speed = *v;
      if (auto v = reader.string("preset")) cfg.ego.preset = *v;
      if (auto v = reader.number("t_maneuver_s")) cfg.ego.t_maneuver_s = *v;
      if (auto v = reader.number("x_safety_m")) cfg.ego.x_safety_m = *v;
    } else if (section.name == "[]remote") {
      RemoteSpec remote;
      reader.require("behavior");
      if (auto v = reader.string("behavior")) remote.behavior = *v;
      if (auto v = reader.string("params")) remote.params = *v;
      if (auto v = reader.number("lane")) remote.lane = *v;
      if (auto v = reader.string("route")) remote.route = *v;
      if (auto v = reader.number("x")) remote.x = *v;
      if (auto v = reader.number("speed")) remote.speed = *v;
      cfg.remotes.push_back(std::move(remote));
    } else if (section.name == "intersection") {
      ObstacleDisk region;
      reader.require("x");
      reader.require("y");
      reader.require("radius");
      if (auto v = reader.number("x")) region.center.x = *v;
      if (auto v = reader.number("y")) region.center.y = *v;
      if (auto v = reader.number("radius")) region.radius = *v;
      cfg.intersection = region;
    } else {
      const std::string shown =
          section.name.rfind("[]", 0) == 0 ? section.name.substr(2) : section.name;
      throw ParseError(source_name + ":" + std::to_string(section.line) + ": unknown section [" +
                       shown + "]");
    }
    reader.reject_unknown();
  }

  if (!saw_scenario) violations.push_back(source_name + ": missing [scenario] section");
  if (!saw_ego) violations.push_back(source_name + ": missing [ego] section");

  // Semantic checks, all collected before reporting.
  if (saw_scenario) {
    if (!(cfg.duration_s > 0.0)) violations.push_back("duration_s must be positive");
    if (!(cfg.dt_s > 0.0 && cfg.dt_s <= 0.05)) {
      violations.push_back("dt_s must lie in (0, 0.05]");
    }
    if (!(cfg.lane_width_m > 0.0)) violations.push_back("lane_width_m must be positive");
    if (cfg.name.empty()) violations.push_back("scenario name must not be empty");
  }
  if (!(cfg.bus.rate_hz > 0.0)) violations.push_back("bus rate_hz must be positive");
  if (cfg.bus.latency < 0.0) violations.push_back("bus latency_s must be nonnegative");
  if (cfg.bus.drop_probability < 0.0 || cfg.bus.drop_probability > 1.0) {
    violations.push_back("bus drop_probability must lie in [0, 1]");
  }
  if (saw_ego) {
    if (cfg.ego.speed < 0.0) violations.push_back("ego speed must be nonnegative");
    if (cfg.ego.x_safety_m < 0.0) violations.push_back("ego x_safety_m must be nonnegative");
    if (!tuning_preset(cfg.ego.preset)) {
      violations.push_back("unknown preset '" + cfg.ego.preset + "'");
    }
    if (cfg.ego.t_maneuver_s && *cfg.ego.t_maneuver_s <= 0.0) {
      violations.push_back("t_maneuver_s must be positive");
    }
  }
  for (std::size_t i = 0; i < cfg.remotes.size(); ++i) {
    const RemoteSpec& r = cfg.remotes[i];
    const std::string who = "remote #" + std::to_string(i + 1);
    try {
      const auto kind = parse_profile_kind(r.behavior);
      if (kind == BehaviorProfile::Kind::HardBrakeAt) {
        std::istringstream ps(r.params);
        double t0 = 0, decel = 0;
        std::string extra;
        if (!(ps >> t0 >> decel) || (ps >> extra) || t0 < 0.0 || decel <= 0.0) {
          violations.push_back(who + ": hard_brake_at needs params \"<t0> <decel>\"");
        }
      } else if (!r.params.empty()) {
        violations.push_back(who + ": behavior '" + r.behavior + "' takes no params");
      }
      if (kind == BehaviorProfile::Kind::Parked && r.speed != 0.0) {
        violations.push_back(who + ": parked vehicles must have speed 0");
      }
      if (kind == BehaviorProfile::Kind::Crossing && !r.route) {
        violations.push_back(who + ": crossing vehicles need a route");
      }
    } catch (const UnknownProfile& e) {
      violations.push_back(who + ": " + e.what());
    }
    if (r.lane.has_value() == r.route.has_value()) {
      violations.push_back(who + ": exactly one of 'lane' and 'route' must be set");
    }
    if (r.route && r.x < 0.0) {
      violations.push_back(who + ": start arclength x must be nonnegative on a route");
    }
  }
  if (cfg.intersection && cfg.intersection->radius <= 0.0) {
    violations.push_back("intersection radius must be positive");
  }

  throw_if_violations(violations);
  return cfg;
}

std::optional<ScenarioTuning> tuning_preset(const std::string& name) {
  ScenarioTuning t;
  t.band.ks = 1.0;
  t.band.node_spacing = 1.0;
  if (name == "default") {
    t.band.ke = 0.008;
    t.band.r0 = 6.0;
    t.band.window_length = 40.0;
    t.t_maneuver_k = 3.0;
    return t;
  }
  if (name == "fast") {
    t.band.ke = 0.016;
    t.band.r0 = 4.5;
    t.band.window_length = 32.0;
    t.t_maneuver_k = 2.0;
    return t;
  }
  if (name == "smooth") {
    t.band.ke = 0.006;
    t.band.r0 = 7.0;
    t.band.window_length = 52.0;
    t.t_maneuver_k = 4.0;
    return t;
  }
  return std::nullopt;
}

namespace {

PlannedPath fit_route_or_note(const std::string& text, const std::string& label,
                              std::vector<std::string>& violations) {
  try {
    const std::vector<Waypoint> pts = parse_route(text);
    if (pts.size() < 4) {
      violations.push_back(label + ": route needs at least 4 waypoints");
      return {};
    }
    return PlannedPath::fit(pts, 4);
  } catch (const Error& e) {
    violations.push_back(label + ": " + e.what());
    return {};
  }
}

PlannedPath lane_route(double lane_y, double x_lo, double x_hi, bool reversed) {
  std::vector<Waypoint> pts;
  for (double x = x_lo; x <= x_hi + 1e-9; x += 10.0) pts.push_back({x, lane_y});
  if (pts.size() < 4) {
    pts.clear();
    for (int i = 0; i < 4; ++i) pts.push_back({x_lo + (x_hi - x_lo) * i / 3.0, lane_y});
  }
  if (reversed) std::reverse(pts.begin(), pts.end());
  return PlannedPath::fit(pts, 4);
}

}  // namespace

RuntimeScenario resolve_scenario(const ScenarioConfig& config, const AssetResolver& resolver) {
  std::vector<std::string> violations;
  RuntimeScenario rt;
  rt.config = config;

  const auto preset = tuning_preset(config.ego.preset);
  if (preset) rt.tuning = *preset;

  const auto route_text = resolver(config.ego.route_file);
  if (!route_text) {
    violations.push_back("ego route file not found: " + config.ego.route_file);
  } else {
    rt.ego_route = fit_route_or_note(*route_text, "ego route", violations);
  }
  rt.ego_initial = {config.ego.x, config.ego.y, config.ego.heading, config.ego.speed};

  // Road extent for generated lane routes, wide enough for every start point.
  double x_lo = config.ego.x, x_hi = config.ego.x;
  for (const Waypoint& w : rt.ego_route.knots()) {
    x_lo = std::min(x_lo, w.x);
    x_hi = std::max(x_hi, w.x);
  }
  for (const RemoteSpec& r : config.remotes) {
    if (r.lane) {
      x_lo = std::min(x_lo, r.x);
      x_hi = std::max(x_hi, r.x);
    }
  }
  x_lo -= 60.0;
  x_hi += 60.0;

  std::uint32_t next_id = 2;  // ego is vehicle 1
  for (std::size_t i = 0; i < config.remotes.size(); ++i) {
    const RemoteSpec& spec = config.remotes[i];
    const std::string who = "remote #" + std::to_string(i + 1);
    RuntimeVehicle vehicle;
    vehicle.id = next_id++;
    try {
      vehicle.profile.kind = parse_profile_kind(spec.behavior);
    } catch (const UnknownProfile&) {
      continue;  // already reported by parse_scenario
    }
    vehicle.profile.speed = std::abs(spec.speed);
    if (vehicle.profile.kind == BehaviorProfile::Kind::HardBrakeAt) {
      std::istringstream ps(spec.params);
      ps >> vehicle.profile.brake_time >> vehicle.profile.brake_decel;
    }

    if (spec.route) {
      const auto text = resolver(*spec.route);
      if (!text) {
        violations.push_back(who + ": route file not found: " + *spec.route);
        continue;
      }
      vehicle.route = fit_route_or_note(*text, who, violations);
      if (vehicle.route.empty()) continue;
      const double s0 = std::clamp(spec.x, 0.0, vehicle.route.length());
      const PathFrame f = vehicle.route.frame_at(s0);
      vehicle.initial = {f.point.x, f.point.y, f.heading, vehicle.profile.speed};
    } else {
      const bool oncoming = spec.speed < 0.0;
      const double lane_y = *spec.lane * config.lane_width_m;
      vehicle.route = lane_route(lane_y, x_lo, x_hi, oncoming);
      vehicle.initial = {spec.x, lane_y, oncoming ? M_PI : 0.0, vehicle.profile.speed};
    }
    if (vehicle.profile.kind == BehaviorProfile::Kind::Parked) vehicle.initial.speed = 0.0;
    rt.remotes.push_back(std::move(vehicle));
  }

  if (!rt.ego_route.empty()) {
    if (config.intersection) {
      const ObstacleDisk& region = *config.intersection;
      for (double s = 0.0; s <= rt.ego_route.length(); s += 0.5) {
        if ((rt.ego_route.point_at(s) - region.center).norm() <= region.radius) {
          rt.region_entry_s = s;
          break;
        }
      }
      if (rt.region_entry_s < 0.0) {
        violations.push_back("conflict region is never touched by the ego route");
      }
    }
    // Initial poses must be collision-free.
    std::vector<std::pair<std::string, OrientedRect>> rects;
    rects.push_back({"ego", footprint(rt.ego_initial, rt.vehicle)});
    for (std::size_t i = 0; i < rt.remotes.size(); ++i) {
      rects.push_back({"remote #" + std::to_string(i + 1),
                       footprint(rt.remotes[i].initial, rt.vehicle)});
    }
    for (std::size_t a = 0; a < rects.size(); ++a) {
      for (std::size_t b = a + 1; b < rects.size(); ++b) {
        if (check_collision(rects[a].second, rects[b].second)) {
          violations.push_back("initial poses of " + rects[a].first + " and " + rects[b].first +
                               " collide");
        }
      }
    }
  }

  throw_if_violations(violations);

  rt.decision.x_safety = config.ego.x_safety_m;
  rt.decision.t_maneuver_override = config.ego.t_maneuver_s;
  rt.decision.t_maneuver_k = rt.tuning.t_maneuver_k;
  rt.decision.lateral_excursion = config.lane_width_m;
  return rt;
}

namespace {

AssetResolver embedded_resolver() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const auto asset = embedded_asset(name)) return std::string(*asset);
    return std::nullopt;
  };
}

}  // namespace

RuntimeScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const ScenarioConfig cfg = parse_scenario(ss.str(), path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  AssetResolver resolver = [dir](const std::string& name) -> std::optional<std::string> {
    const std::filesystem::path candidate = dir / name;
    if (std::ifstream f(candidate); f) {
      std::ostringstream body;
      body << f.rdbuf();
      return body.str();
    }
    if (const auto asset = embedded_asset(name)) return std::string(*asset);
    return std::nullopt;
  };
  return resolve_scenario(cfg, resolver);
}

RuntimeScenario load_embedded_scenario(const std::string& name) {
  const auto asset = embedded_asset(name + ".toml");
  if (!asset) throw ParseError("no shipped scenario named '" + name + "'");
  const ScenarioConfig cfg = parse_scenario(std::string(*asset), name + ".toml");
  return resolve_scenario(cfg, embedded_resolver());
}

std::vector<ScenarioListing> list_embedded_scenarios() {
  std::vector<ScenarioListing> out;
  for (const EmbeddedAsset& asset : embedded_assets()) {
    const std::string_view name = asset.name;
    if (name.size() < 5 || name.substr(name.size() - 5) != ".toml") continue;
    ScenarioListing entry;
    entry.name = std::string(name.substr(0, name.size() - 5));
    try {
      entry.description = parse_scenario(std::string(asset.content), std::string(name)).description;
    } catch (const Error&) {
      entry.description = "(unparsable)";
    }
    out.push_back(std::move(entry));
  }
  std::sort(out.begin(), out.end(),
            [](const ScenarioListing& a, const ScenarioListing& b) { return a.name < b.name; });
  return out;
}

}  // namespace cca
