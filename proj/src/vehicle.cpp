#include "cca/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include "cca/errors.hpp"

namespace cca {

VehiclePose step_dynamics(const VehiclePose& pose, const ControlInput& u, const VehicleParams& p,
                          double dt) {
  const double steer = std::clamp(u.steering, -p.max_steer, p.max_steer);
  const double accel = std::clamp(u.accel, -p.max_decel, p.max_accel);
  VehiclePose next;
  next.x = pose.x + pose.speed * std::cos(pose.heading) * dt;
  next.y = pose.y + pose.speed * std::sin(pose.heading) * dt;
  next.heading = pose.heading + pose.speed / p.wheelbase * std::tan(steer) * dt;
  next.speed = std::max(0.0, pose.speed + accel * dt);
  return next;
}

OrientedRect footprint(const VehiclePose& pose, const VehicleParams& p) {
  return make_rect(pose.position(), pose.heading, p.length, p.width);
}

bool check_collision(const OrientedRect& a, const OrientedRect& b) { return rects_overlap(a, b); }

BehaviorProfile::Kind parse_profile_kind(const std::string& name) {
  using Kind = BehaviorProfile::Kind;
  if (name == "constant_speed") return Kind::ConstantSpeed;
  if (name == "hard_brake_at") return Kind::HardBrakeAt;
  if (name == "parked") return Kind::Parked;
  if (name == "crossing") return Kind::Crossing;
  throw UnknownProfile("unknown behavior profile: " + name);
}

BehaviorCommand scripted_behavior(const BehaviorProfile& profile, double t, double current_speed) {
  using Kind = BehaviorProfile::Kind;
  switch (profile.kind) {
    case Kind::ConstantSpeed:
    case Kind::Crossing:
      return {profile.speed, false, std::nullopt};
    case Kind::Parked:
      return {0.0, false, std::nullopt};
    case Kind::HardBrakeAt: {
      if (t < profile.brake_time) return {profile.speed, false, std::nullopt};
      const bool decelerating = current_speed > 1e-3;
      BehaviorCommand cmd{0.0, decelerating, std::nullopt};
      if (decelerating) cmd.accel_override = -profile.brake_decel;
      return cmd;
    }
  }
  throw UnknownProfile("unhandled behavior profile kind");
}

}  // namespace cca
