#pragma once

#include <optional>
#include <string>

#include "cca/geometry.hpp"

namespace cca {

struct VehiclePose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  ///< radians CCW from +x
  double speed = 0.0;    ///< m/s, never negative

  Vec2 position() const { return {x, y}; }
};

struct VehicleParams {
  double wheelbase = 2.7;
  double length = 4.5;
  double width = 1.8;
  double max_steer = 0.6;   ///< rad
  double max_accel = 3.0;   ///< m/s^2
  double max_decel = 8.0;   ///< m/s^2 (magnitude)
};

struct ControlInput {
  double steering = 0.0;  ///< front wheel angle, rad, positive left
  double accel = 0.0;     ///< m/s^2, negative brakes
};

/// Forward-Euler kinematic bicycle step. Inputs are saturated to the vehicle
/// limits; speed never drops below zero (no reverse).
VehiclePose step_dynamics(const VehiclePose& pose, const ControlInput& u, const VehicleParams& p,
                          double dt);

/// Rectangle length x width centered at the pose, rotated by its heading.
OrientedRect footprint(const VehiclePose& pose, const VehicleParams& p);

/// Separating-axis collision test; touching counts as collision.
bool check_collision(const OrientedRect& a, const OrientedRect& b);

/// Scripted longitudinal behavior of a remote vehicle.
struct BehaviorProfile {
  enum class Kind { ConstantSpeed, HardBrakeAt, Parked, Crossing };
  Kind kind = Kind::ConstantSpeed;
  double speed = 0.0;        ///< cruise speed, m/s
  double brake_time = 0.0;   ///< s, HardBrakeAt only
  double brake_decel = 0.0;  ///< m/s^2, HardBrakeAt only
};

struct BehaviorCommand {
  double target_speed = 0.0;
  bool brake_flag = false;
  std::optional<double> accel_override;  ///< set while hard braking
};

/// Parses "constant_speed" / "hard_brake_at" / "parked" / "crossing";
/// throws UnknownProfile otherwise.
BehaviorProfile::Kind parse_profile_kind(const std::string& name);

/// Target speed and brake flag at time t for the given profile.
BehaviorCommand scripted_behavior(const BehaviorProfile& profile, double t, double current_speed);

}  // namespace cca
