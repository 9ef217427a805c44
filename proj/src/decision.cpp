#include "cca/decision.hpp"

#include <algorithm>
#include <cmath>

#include "cca/errors.hpp"

namespace cca {

const char* to_string(DecisionMode mode) {
  switch (mode) {
    case DecisionMode::LaneFollow: return "LaneFollow";
    case DecisionMode::AdaptSpeed: return "AdaptSpeed";
    case DecisionMode::Avoid: return "Avoid";
    case DecisionMode::EmergencyBrake: return "EmergencyBrake";
    case DecisionMode::WaitAtIntersection: return "WaitAtIntersection";
  }
  return "?";
}

std::optional<DecisionMode> decision_mode_from_string(const std::string& name) {
  for (DecisionMode m : {DecisionMode::LaneFollow, DecisionMode::AdaptSpeed, DecisionMode::Avoid,
                         DecisionMode::EmergencyBrake, DecisionMode::WaitAtIntersection}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

DangerZone danger_zone(double x1, double v_adj, double v_ego, double t_maneuver, double x_safety,
                       std::uint32_t source_vehicle) {
  const double x2 = x1 + (v_adj - v_ego) * t_maneuver + x_safety;
  return {std::min(x1, x2), std::max(x1, x2), source_vehicle};
}

bool in_danger_zone(const DangerZone& zone, double ego_s) {
  return zone.lo <= ego_s && ego_s <= zone.hi;
}

double estimate_t_maneuver(double lateral_excursion, double v_ego, double k_preset,
                           std::optional<double> active_window_length) {
  if (v_ego <= 0.1) {
    throw EgoTooSlow("cannot estimate maneuver time at " + std::to_string(v_ego) + " m/s");
  }
  const double t = active_window_length ? *active_window_length / v_ego
                                        : 2.0 * lateral_excursion * k_preset / v_ego;
  return std::clamp(t, 1.0, 10.0);
}

namespace {

struct Interval {
  double lo, hi;
  bool empty = false;
};

// Time window during which a constant-velocity vehicle is inside the disk.
Interval crossing_occupancy(const BsmRecord& bsm, const ObstacleDisk& region) {
  const Vec2 p{bsm.x - region.center.x, bsm.y - region.center.y};
  const Vec2 v{bsm.speed * std::cos(bsm.heading), bsm.speed * std::sin(bsm.heading)};
  const double a = v.squared_norm();
  const double b = 2.0 * p.dot(v);
  const double c = p.squared_norm() - region.radius * region.radius;
  if (a < 1e-12) {
    if (c <= 0.0) return {0.0, std::numeric_limits<double>::infinity()};
    return {0.0, 0.0, true};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {0.0, 0.0, true};
  const double sq = std::sqrt(disc);
  const double t1 = (-b - sq) / (2.0 * a);
  const double t2 = (-b + sq) / (2.0 * a);
  if (t2 < 0.0) return {0.0, 0.0, true};  // already past and receding
  return {std::max(0.0, t1), t2};
}

}  // namespace

bool intersection_clearance(const PlannedPath& ego_turn_path, double ego_s, double ego_speed,
                            const BsmRecord& crossing, double now, const ObstacleDisk& region,
                            double margin) {
  const double age = now - static_cast<double>(crossing.timestamp_ms) / 1000.0;
  if (age > 0.5) {
    throw StaleBsm("crossing vehicle record is " + std::to_string(age) + " s old");
  }

  const Interval theirs = crossing_occupancy(crossing, region);
  if (theirs.empty) return true;

  // Ego occupancy: arclength range where the remaining path lies inside the
  // region, traversed at the given speed.
  const double step = 0.5;
  double s_in = -1.0, s_out = -1.0;
  for (double s = ego_s; s <= ego_turn_path.length(); s += step) {
    const bool inside = (ego_turn_path.point_at(s) - region.center).norm() <= region.radius;
    if (inside && s_in < 0.0) s_in = s;
    if (inside) s_out = s;
    if (!inside && s_in >= 0.0) break;  // first contiguous pass only
  }
  if (s_in < 0.0) return true;  // path never meets the region
  if (ego_speed < 1e-6) return false;
  const double t_in = std::max(0.0, (s_in - ego_s) / ego_speed);
  const double t_out = (s_out - ego_s) / ego_speed;

  const bool overlap = (t_in - margin) <= (theirs.hi + margin) &&
                       (theirs.lo - margin) <= (t_out + margin);
  return !overlap;
}

namespace {

struct Classified {
  const PerceivedVehicle* brake_threat = nullptr;
  const PerceivedVehicle* preceding = nullptr;  // nearest in-lane vehicle ahead
  const PerceivedVehicle* obstacle = nullptr;   // nearest slow/stopped in-lane vehicle ahead
  std::vector<DangerZone> zones;
  bool hold_threat = false;  // keeps EmergencyBrake engaged
};

Classified classify(const Perception& p, const EgoContext& ego, const DecisionParams& params) {
  Classified out;
  const double half_lane = 0.5 * ego.lane_width;
  double t_maneuver = 10.0;  // conservative when the ego is at rest
  if (ego.speed > 0.1) {
    t_maneuver = params.t_maneuver_override
                     ? std::clamp(*params.t_maneuver_override, 1.0, 10.0)
                     : estimate_t_maneuver(params.lateral_excursion, ego.speed,
                                           params.t_maneuver_k, ego.active_window_length);
  } else if (params.t_maneuver_override) {
    t_maneuver = std::clamp(*params.t_maneuver_override, 1.0, 10.0);
  }

  for (const PerceivedVehicle& v : p.vehicles) {
    if (p.intersection && v.id == p.intersection->crossing.vehicle_id) continue;
    const double abs_lat = std::abs(v.lateral);
    const bool ahead = v.s > ego.s_front;
    const double gap = v.s - v.half_length - ego.s_front;
    if (abs_lat < half_lane) {
      const bool closing = v.v_along < ego.speed + 0.5;
      if (ahead && gap <= params.eebl_range && v.brake_flag && closing) {
        if (!out.brake_threat || v.s < out.brake_threat->s) out.brake_threat = &v;
      }
      if (ahead && gap <= params.eebl_range && (v.brake_flag || v.speed < 0.5)) {
        out.hold_threat = true;
      }
      if (ahead) {
        if (!out.preceding || v.s < out.preceding->s) out.preceding = &v;
        const bool slow = v.v_along < ego.cruise_speed - params.slow_obstacle_margin ||
                          v.speed < 0.5;
        if (slow && gap <= params.avoid_trigger_range) {
          if (!out.obstacle || v.s < out.obstacle->s) out.obstacle = &v;
        }
      }
    } else if (abs_lat <= 1.5 * ego.lane_width) {
      // Adjacent-lane vehicle: danger zone from its rear bumper, measured in
      // the vehicle's own travel direction.
      const double rear = v.s - (v.v_along >= 0.0 ? v.half_length : -v.half_length);
      out.zones.push_back(
          danger_zone(rear, v.v_along, ego.speed, t_maneuver, params.x_safety, v.id));
    }
  }
  return out;
}

double approach_speed_cap(double gap, double standoff, double comfort_decel) {
  if (gap <= standoff) return std::max(0.0, gap - standoff);  // reopen the gap gently
  return std::sqrt(2.0 * comfort_decel * (gap - standoff));
}

// Speed allowed by the vehicle ahead, if any.
double gap_keeping_target(const Classified& cls, const EgoContext& ego,
                          const DecisionParams& params) {
  if (!cls.preceding) return ego.cruise_speed;
  const double gap = cls.preceding->s - cls.preceding->half_length - ego.s_front;
  const double lead_speed = std::max(0.0, cls.preceding->v_along);
  const double cap =
      lead_speed + approach_speed_cap(gap, params.standoff_gap, params.comfort_decel);
  return std::min(ego.cruise_speed, cap);
}

}  // namespace

std::pair<DecisionState, Directives> step_fsm(const DecisionState& state,
                                              const Perception& perception, const EgoContext& ego,
                                              const DecisionParams& params) {
  const Classified cls = classify(perception, ego, params);
  const bool blocked = std::any_of(cls.zones.begin(), cls.zones.end(), [&](const DangerZone& z) {
    const DangerZone widened{z.lo - params.zone_start_margin, z.hi + params.zone_start_margin,
                             z.source_vehicle};
    return in_danger_zone(widened, ego.s_front);
  });

  // Intersection gate: active while approaching the conflict region with a
  // fresh crossing-vehicle record and no safe gap.
  bool intersection_block = false;
  double stop_line_s = 0.0;
  if (perception.intersection) {
    const IntersectionContext& ctx = *perception.intersection;
    const double to_entry = ctx.region_entry_s - ego.s_front;
    stop_line_s = ctx.region_entry_s - params.stop_margin;
    if (to_entry > 0.0 && to_entry <= params.approach_range && ctx.ego_path != nullptr) {
      // A stopped ego predicts its crossing at the speed it would resume with.
      const double predict_speed = std::max(ego.speed, ego.cruise_speed);
      intersection_block =
          !intersection_clearance(*ctx.ego_path, ego.s_front, predict_speed, ctx.crossing,
                                  ctx.now, ctx.region, params.intersection_margin);
    }
  }

  DecisionState next = state;
  next.active_zones = cls.zones;
  Directives directives;

  const auto enter_lane_follow = [&] {
    next.mode = DecisionMode::LaneFollow;
    next.has_deformed_path = false;
    directives.target_speed = gap_keeping_target(cls, ego, params);
  };
  const auto enter_emergency = [&] {
    next.mode = DecisionMode::EmergencyBrake;
    next.has_deformed_path = false;
    directives.target_speed = 0.0;
    directives.brake_hard = true;
  };
  const auto enter_wait = [&] {
    next.mode = DecisionMode::WaitAtIntersection;
    next.has_deformed_path = false;
    const double dist = std::max(0.0, stop_line_s - ego.s_front);
    directives.target_speed =
        std::min(ego.cruise_speed, std::sqrt(2.0 * params.comfort_decel * dist));
  };
  const auto enter_avoid = [&] {
    next.mode = DecisionMode::Avoid;
    next.has_deformed_path = true;
    directives.target_speed = ego.cruise_speed;
    directives.use_deformed_path = true;
  };
  const auto enter_adapt = [&] {
    next.mode = DecisionMode::AdaptSpeed;
    next.has_deformed_path = false;
    const double lead = cls.preceding ? std::max(0.0, cls.preceding->v_along)
                                      : (cls.obstacle ? std::max(0.0, cls.obstacle->v_along) : 0.0);
    directives.target_speed = std::min(lead, gap_keeping_target(cls, ego, params));
  };

  switch (state.mode) {
    case DecisionMode::LaneFollow:
      if (cls.brake_threat) enter_emergency();
      else if (intersection_block) enter_wait();
      else if (cls.obstacle && !blocked) enter_avoid();
      else if (cls.obstacle && blocked) enter_adapt();
      else enter_lane_follow();
      break;
    case DecisionMode::AdaptSpeed:
      if (cls.brake_threat) enter_emergency();
      else if (!cls.obstacle) enter_lane_follow();
      else if (!blocked) enter_avoid();
      else enter_adapt();
      break;
    case DecisionMode::Avoid:
      // Exit only once the deformation has settled AND nothing ahead still
      // warrants the maneuver; otherwise a distant obstacle whose deformation
      // is still tiny would flip the mode every tick.
      if (cls.brake_threat) enter_emergency();
      else if (ego.deformation_merged && !cls.obstacle) enter_lane_follow();
      else enter_avoid();
      break;
    case DecisionMode::EmergencyBrake:
      if (ego.speed < 0.1 && !cls.brake_threat && !cls.hold_threat) enter_lane_follow();
      else enter_emergency();
      break;
    case DecisionMode::WaitAtIntersection:
      if (cls.brake_threat) enter_emergency();
      else if (!intersection_block) enter_lane_follow();
      else enter_wait();
      break;
  }

  next.target_speed = directives.target_speed;
  return {next, directives};
}

}  // namespace cca
