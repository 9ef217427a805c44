#pragma once

#include "cca/path.hpp"
#include "cca/vehicle.hpp"

namespace cca {

struct TrackingGains {
  double k_lat = 0.12;            ///< rad per meter of lateral deviation
  double k_yaw = 0.9;             ///< unitless yaw-error gain
  double preview_distance = 5.0;  ///< meters, base look-ahead
  double steer_limit = 0.6;       ///< rad
  double accel_limit = 2.5;       ///< m/s^2
  double decel_limit = 8.0;       ///< m/s^2 (magnitude)
};

struct TrackingError {
  double lateral_deviation = 0.0;  ///< signed meters, positive left of path
  double yaw_error = 0.0;          ///< path heading minus vehicle heading, (-pi, pi]
};

/// Errors at the preview point: the path frame `preview_distance` ahead of the
/// vehicle's projection (clamped to the path end).
TrackingError compute_errors(const PlannedPath& path, const VehiclePose& pose,
                             const TrackingGains& gains);

/// Same, but with the projection restricted to arclengths near `s_hint`.
TrackingError compute_errors(const PlannedPath& path, const VehiclePose& pose,
                             const TrackingGains& gains, double s_hint);

/// Proportional steering on both errors, clamped to the steer limit.
/// Positive output turns left; the command drives both errors toward zero.
double steer_command(const TrackingError& err, const TrackingGains& gains);

/// Proportional speed controller (unit gain), clamped to accel/decel limits.
double speed_command(double current, double target, const TrackingGains& gains, double dt);

/// Base preview below 15 m/s, growing with a 0.5 s time headway above.
double speed_scaled_preview(double base, double speed);

}  // namespace cca
