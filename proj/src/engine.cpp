#include "cca/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "cca/errors.hpp"
#include "cca/tracking.hpp"

namespace cca {

namespace {

struct CachedBsm {
  BsmRecord record;
  double received_at = 0.0;
};

struct VehicleState {
  std::uint32_t id = 0;
  VehiclePose pose;
  const PlannedPath* route = nullptr;
  BehaviorProfile profile;
  double s_hint = 0.0;
  ControlInput control;
  bool brake_flag = false;
  double best_gap_to_ego = std::numeric_limits<double>::infinity();
  VehiclePose best_gap_pose;
};

BsmRecord make_bsm(const VehicleState& v, double now) {
  BsmRecord rec;
  rec.vehicle_id = v.id;
  rec.timestamp_ms = static_cast<std::uint32_t>(std::llround(now * 1000.0));
  rec.x = v.pose.x;
  rec.y = v.pose.y;
  rec.speed = v.pose.speed;
  rec.heading = normalize_heading(v.pose.heading);
  rec.brake_flag = v.brake_flag;
  return rec;
}

}  // namespace

SimulationTrace run(const RuntimeScenario& scenario, const RunOptions& options) {
  const ScenarioConfig& cfg = scenario.config;
  ScenarioTuning tuning = scenario.tuning;
  if (options.preset_override) {
    const auto preset = tuning_preset(*options.preset_override);
    if (!preset) throw ValidationError("unknown preset '" + *options.preset_override + "'");
    tuning = *preset;
  }
  BusConfig bus_cfg = cfg.bus;
  if (options.drop_override) bus_cfg.drop_probability = *options.drop_override;
  if (options.seed_override) bus_cfg.rng_seed = *options.seed_override;

  SimulationTrace trace;
  trace.scenario_name = cfg.name;
  trace.mode_label = bus_cfg.drop_probability >= 0.999 ? "v2x-off" : "v2x-on";
  trace.dt = cfg.dt_s;
  trace.lane_width = cfg.lane_width_m;
  trace.wheelbase = scenario.vehicle.wheelbase;
  trace.ego_route_polyline = scenario.ego_route.knots();

  MessageBus bus(bus_cfg);
  std::unique_ptr<BsmFrameLog> frame_log;
  if (options.frame_log_path) frame_log = std::make_unique<BsmFrameLog>(*options.frame_log_path);
  std::unique_ptr<UdpExporter> udp;
  if (options.udp_endpoint) udp = std::make_unique<UdpExporter>(*options.udp_endpoint);

  VehicleState ego;
  ego.id = 1;
  ego.pose = scenario.ego_initial;
  ego.route = &scenario.ego_route;
  ego.s_hint = scenario.ego_route.project(ego.pose.position()).s;
  bus.register_vehicle(ego.id);

  std::vector<VehicleState> remotes;
  for (const RuntimeVehicle& rv : scenario.remotes) {
    VehicleState state;
    state.id = rv.id;
    state.pose = rv.initial;
    state.route = &rv.route;
    state.profile = rv.profile;
    state.s_hint = rv.route.project(state.pose.position()).s;
    remotes.push_back(state);
    bus.register_vehicle(rv.id);
  }

  DecisionState decision_state;
  decision_state.target_speed = cfg.ego.speed;
  std::map<std::uint32_t, CachedBsm> cache;
  std::map<std::uint32_t, double> remote_s_hints;  // projections onto the ego route
  std::optional<DeformResult> deformation;
  bool deformation_merged = false;

  const TrackingGains& gains = scenario.gains;
  const VehicleParams& vparams = scenario.vehicle;
  const double dt = cfg.dt_s;
  const long ticks = std::lround(cfg.duration_s / dt);
  const long publish_every = std::max(1L, std::lround(1.0 / (bus_cfg.rate_hz * dt)));
  const double half_len = vparams.length * 0.5;

  for (long k = 0; k <= ticks; ++k) {
    const double now = k * dt;

    // (1) deliver due messages; only the ego consumes them
    int delivered = 0;
    for (const BsmRecord& rec : bus.poll(ego.id, now)) {
      ++delivered;
      auto& slot = cache[rec.vehicle_id];
      if (slot.received_at == 0.0 || rec.timestamp_ms >= slot.record.timestamp_ms) {
        slot = {rec, now};
      }
    }
    for (VehicleState& remote : remotes) delivered += static_cast<int>(bus.poll(remote.id, now).size());
    for (auto it = cache.begin(); it != cache.end();) {
      it = now - it->second.received_at > 0.5 ? cache.erase(it) : std::next(it);
    }

    // (2) ego decision on the current picture
    const PathProjection ego_proj =
        scenario.ego_route.project_near(ego.pose.position(), ego.s_hint, 40.0);
    ego.s_hint = ego_proj.s;
    const double ego_s_front = ego_proj.s + half_len;

    Perception perception;
    for (const auto& [id, entry] : cache) {
      const BsmRecord& rec = entry.record;
      auto hint_it = remote_s_hints.find(id);
      const PathProjection proj =
          hint_it == remote_s_hints.end()
              ? scenario.ego_route.project({rec.x, rec.y})
              : scenario.ego_route.project_near({rec.x, rec.y}, hint_it->second, 50.0);
      remote_s_hints[id] = proj.s;
      PerceivedVehicle v;
      v.id = id;
      v.position = {rec.x, rec.y};
      v.speed = rec.speed;
      v.heading = rec.heading;
      v.brake_flag = rec.brake_flag;
      v.s = proj.s;
      v.lateral = proj.lateral_offset;
      const double path_heading = scenario.ego_route.frame_at(proj.s).heading;
      v.v_along = rec.speed * std::cos(rec.heading - path_heading);
      v.half_length = half_len;
      perception.vehicles.push_back(v);
    }
    if (cfg.intersection && scenario.region_entry_s >= 0.0) {
      // Crossing candidate: the moving vehicle that reaches the region first.
      const ObstacleDisk& region = *cfg.intersection;
      double best_eta = std::numeric_limits<double>::infinity();
      for (const auto& [id, entry] : cache) {
        const BsmRecord& rec = entry.record;
        if (rec.speed < 0.5) continue;
        const Vec2 to_region = region.center - Vec2{rec.x, rec.y};
        const Vec2 vel{rec.speed * std::cos(rec.heading), rec.speed * std::sin(rec.heading)};
        const bool inside = to_region.norm() <= region.radius;
        if (!inside && vel.dot(to_region) <= 0.0) continue;
        const double eta = inside ? 0.0 : (to_region.norm() - region.radius) / rec.speed;
        if (eta < best_eta) {
          best_eta = eta;
          IntersectionContext ctx;
          ctx.region = region;
          ctx.crossing = rec;
          ctx.region_entry_s = scenario.region_entry_s;
          ctx.now = now;
          ctx.ego_path = &scenario.ego_route;
          perception.intersection = ctx;
        }
      }
    }

    EgoContext ego_ctx;
    ego_ctx.s_front = ego_s_front;
    ego_ctx.speed = ego.pose.speed;
    ego_ctx.lane_width = cfg.lane_width_m;
    ego_ctx.cruise_speed = cfg.ego.speed;
    ego_ctx.path_length = scenario.ego_route.length();
    if (decision_state.mode == DecisionMode::Avoid && deformation) {
      ego_ctx.active_window_length = deformation->s_end - deformation->s_start;
    }
    ego_ctx.deformation_merged = deformation_merged;

    auto [next_state, directives] = step_fsm(decision_state, perception, ego_ctx, scenario.decision);
    decision_state = next_state;

    // (3) ego controls on the active path, recomputing the deformation from
    // the latest reported obstacle positions every tick
    const PlannedPath* active_path = &scenario.ego_route;
    if (directives.use_deformed_path) {
      std::vector<ObstacleDisk> obstacles;
      for (const PerceivedVehicle& v : perception.vehicles) {
        const bool in_corridor = std::abs(v.lateral) < 0.75 * cfg.lane_width_m;
        const bool slow = v.v_along < cfg.ego.speed - scenario.decision.slow_obstacle_margin ||
                          v.speed < 0.5;
        if (in_corridor && slow && v.s > ego_proj.s - tuning.band.window_tail + 2.0) {
          obstacles.push_back({v.position, tuning.obstacle_radius});
        }
      }
      if (!obstacles.empty() &&
          scenario.ego_route.length() - ego_proj.s > 3.0 * tuning.band.node_spacing) {
        try {
          deformation = deform_path(scenario.ego_route, ego_proj.s, obstacles, tuning.band);
        } catch (const NodeInsideObstacle&) {
          // band would start inside an obstacle; keep the previous deformation
        }
      } else if (deformation) {
        deformation->deformed = false;
      }
      if (deformation && deformation->deformed) {
        active_path = &deformation->path;
      }
      double max_u = 0.0;
      if (deformation && deformation->deformed) {
        for (std::size_t i = 0; i < deformation->band_nodes.size(); ++i) {
          max_u = std::max(
              max_u, (deformation->deformed_nodes[i] - deformation->band_nodes[i]).norm());
        }
      }
      deformation_merged = !deformation || !deformation->deformed ||
                           max_u < scenario.decision.merge_threshold;
    } else {
      deformation.reset();
      deformation_merged = false;
    }

    const TrackingError ego_err = compute_errors(*active_path, ego.pose, gains, ego_proj.s);
    ego.control.steering = steer_command(ego_err, gains);
    ego.control.accel = directives.brake_hard
                            ? -vparams.max_decel
                            : speed_command(ego.pose.speed, directives.target_speed, gains, dt);
    ego.brake_flag = directives.brake_hard;

    // (4) remote scripted behaviors
    for (VehicleState& remote : remotes) {
      const BehaviorCommand cmd = scripted_behavior(remote.profile, now, remote.pose.speed);
      remote.brake_flag = cmd.brake_flag;
      double target = cmd.target_speed;
      if (remote.s_hint > remote.route->length() - 2.0) target = 0.0;  // route exhausted
      if (remote.pose.speed < 1e-6 && target < 1e-6) {
        remote.control = {0.0, cmd.accel_override.value_or(0.0)};
      } else {
        const PathProjection proj =
            remote.route->project_near(remote.pose.position(), remote.s_hint, 40.0);
        remote.s_hint = proj.s;
        const TrackingError err = compute_errors(*remote.route, remote.pose, gains, proj.s);
        remote.control.steering = steer_command(err, gains);
        remote.control.accel = cmd.accel_override
                                   ? *cmd.accel_override
                                   : speed_command(remote.pose.speed, target, gains, dt);
      }
    }

    // record the tick: poses at `now` plus the controls chosen at `now`
    TickRecord record;
    record.t = now;
    record.mode = decision_state.mode;
    record.zones = decision_state.active_zones;
    record.delivered = delivered;
    if (decision_state.mode == DecisionMode::Avoid && deformation && deformation->deformed) {
      record.band_nodes = deformation->band_nodes;
      record.deformed_nodes = deformation->deformed_nodes;
    }

    std::vector<OrientedRect> rects;
    rects.push_back(footprint(ego.pose, vparams));
    for (const VehicleState& remote : remotes) rects.push_back(footprint(remote.pose, vparams));
    std::vector<double> min_gaps(rects.size(), std::numeric_limits<double>::infinity());
    bool collided = false;
    for (std::size_t a = 0; a < rects.size(); ++a) {
      for (std::size_t b = a + 1; b < rects.size(); ++b) {
        const double gap = rect_distance(rects[a], rects[b]);
        min_gaps[a] = std::min(min_gaps[a], gap);
        min_gaps[b] = std::min(min_gaps[b], gap);
        if (gap <= 0.0) collided = true;
      }
    }
    const auto snapshot = [&](const VehicleState& v, double gap) {
      VehicleSnapshot snap;
      snap.id = v.id;
      snap.pose = v.pose;
      snap.steer = v.control.steering;
      snap.accel = v.control.accel;
      snap.min_gap = gap;
      return snap;
    };
    record.vehicles.push_back(snapshot(ego, min_gaps[0]));
    for (std::size_t i = 0; i < remotes.size(); ++i) {
      record.vehicles.push_back(snapshot(remotes[i], min_gaps[i + 1]));
      if (min_gaps[i + 1] <= remotes[i].best_gap_to_ego) {
        // track the closest approach for the obstacle dump
        const double ego_gap = rect_distance(rects[0], rects[i + 1]);
        if (ego_gap <= remotes[i].best_gap_to_ego) {
          remotes[i].best_gap_to_ego = ego_gap;
          remotes[i].best_gap_pose = remotes[i].pose;
        }
      }
    }
    record.min_gap = min_gaps[0];
    trace.ticks.push_back(std::move(record));

    if (collided && trace.collision_time < 0.0) trace.collision_time = now;
    if (collided && !options.continue_after_collision) {
      trace.halted_early = true;
      break;
    }

    // (7) publish on the shared 10 Hz schedule
    if (k % publish_every == 0) {
      const auto broadcast = [&](const VehicleState& v) {
        const BsmRecord rec = make_bsm(v, now);
        bus.publish(rec, now);
        if (frame_log) frame_log->append(rec);
        if (udp) udp->send(rec);
      };
      broadcast(ego);
      for (const VehicleState& remote : remotes) broadcast(remote);
    }

    // (5) advance the physics
    if (k < ticks) {
      ego.pose = step_dynamics(ego.pose, ego.control, vparams, dt);
      for (VehicleState& remote : remotes) {
        remote.pose = step_dynamics(remote.pose, remote.control, vparams, dt);
      }
    }
  }

  for (const VehicleState& remote : remotes) {
    if (std::isfinite(remote.best_gap_to_ego)) {
      trace.obstacle_dumps.push_back({remote.id, footprint(remote.best_gap_pose, vparams)});
    }
  }
  trace.metrics = compute_metrics(trace);
  return trace;
}

Metrics compute_metrics(const SimulationTrace& trace) {
  Metrics m;
  if (trace.ticks.empty()) return m;
  double stop_start = -1.0;
  for (const TickRecord& tick : trace.ticks) {
    m.min_gap = std::min(m.min_gap, tick.min_gap);
    const VehicleSnapshot& ego = tick.vehicles.front();
    const double lat_accel =
        ego.pose.speed * ego.pose.speed * std::abs(std::tan(ego.steer)) / trace.wheelbase;
    m.max_lateral_accel = std::max(m.max_lateral_accel, lat_accel);
    if (ego.pose.speed < 0.1) {
      if (stop_start < 0.0) stop_start = tick.t;
    } else {
      stop_start = -1.0;
    }
  }
  m.collision_occurred = m.min_gap <= 0.0;
  if (stop_start >= 0.0) m.time_to_stop = stop_start;
  return m;
}

ComparePair compare_modes(const RuntimeScenario& scenario, const RunOptions& options) {
  RunOptions on = options;
  on.drop_override = 0.0;
  RunOptions off = options;
  off.drop_override = 1.0;
  return {run(scenario, on), run(scenario, off)};
}

}  // namespace cca
