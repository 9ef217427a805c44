#include "cca/tracking.hpp"

#include <algorithm>
#include <cmath>

namespace cca {

namespace {

TrackingError errors_at(const PlannedPath& path, const VehiclePose& pose,
                        const TrackingGains& gains, const PathProjection& proj) {
  const double preview = speed_scaled_preview(gains.preview_distance, pose.speed);
  const double s_preview = std::min(proj.s + preview, path.length());
  const PathFrame frame = path.frame_at(s_preview);
  const Vec2 tangent{std::cos(frame.heading), std::sin(frame.heading)};
  TrackingError err;
  err.lateral_deviation = tangent.cross(pose.position() - frame.point);
  err.yaw_error = wrap_angle(frame.heading - pose.heading);
  return err;
}

}  // namespace

TrackingError compute_errors(const PlannedPath& path, const VehiclePose& pose,
                             const TrackingGains& gains) {
  return errors_at(path, pose, gains, path.project(pose.position()));
}

TrackingError compute_errors(const PlannedPath& path, const VehiclePose& pose,
                             const TrackingGains& gains, double s_hint) {
  return errors_at(path, pose, gains, path.project_near(pose.position(), s_hint, 40.0));
}

double steer_command(const TrackingError& err, const TrackingGains& gains) {
  const double raw = -gains.k_lat * err.lateral_deviation + gains.k_yaw * err.yaw_error;
  return std::clamp(raw, -gains.steer_limit, gains.steer_limit);
}

double speed_command(double current, double target, const TrackingGains& gains, double /*dt*/) {
  const double raw = target - current;  // unit proportional gain, 1/s
  return std::clamp(raw, -gains.decel_limit, gains.accel_limit);
}

double speed_scaled_preview(double base, double speed) {
  return speed <= 15.0 ? base : base + 0.5 * (speed - 15.0);
}

}  // namespace cca
