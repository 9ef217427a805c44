#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cca/path.hpp"
#include "cca/tracking.hpp"
#include "cca/vehicle.hpp"
#include "support/oracles.hpp"

using namespace cca;

namespace {

PlannedPath straight_path(double length) {
  std::vector<Waypoint> pts;
  for (double x = 0.0; x <= length + 1e-9; x += 5.0) pts.push_back({x, 0.0});
  return PlannedPath::fit(pts, 4);
}

}  // namespace

TEST_CASE("zero error on the path") {
  const PlannedPath path = straight_path(100.0);
  TrackingGains gains;
  const TrackingError err = compute_errors(path, {30.0, 0.0, 0.0, 10.0}, gains);
  CHECK(std::abs(err.lateral_deviation) < 1e-9);
  CHECK(std::abs(err.yaw_error) < 1e-9);
}

TEST_CASE("offset left of a straight path reads +1") {
  const PlannedPath path = straight_path(100.0);
  TrackingGains gains;
  gains.preview_distance = 0.0;
  const TrackingError err = compute_errors(path, {30.0, 1.0, 0.0, 10.0}, gains);
  CHECK(err.lateral_deviation == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(err.yaw_error) < 1e-9);
}

TEST_CASE("yaw error equals path heading minus vehicle heading") {
  // Straight slanted path with heading pi/6.
  std::vector<Waypoint> pts;
  for (double s = 0.0; s <= 60.0; s += 3.0) {
    pts.push_back({s * std::cos(M_PI / 6), s * std::sin(M_PI / 6)});
  }
  const PlannedPath path = PlannedPath::fit(pts, 4);
  const TrackingError err = compute_errors(path, {10.0 * std::cos(M_PI / 6),
                                                  10.0 * std::sin(M_PI / 6), 0.0, 5.0},
                                           TrackingGains{});
  CHECK(err.yaw_error == doctest::Approx(M_PI / 6).epsilon(1e-6));
}

TEST_CASE("steer command gains and clamps") {
  TrackingGains gains;
  gains.k_lat = 0.1;
  gains.k_yaw = 0.5;
  gains.steer_limit = 0.6;
  CHECK(steer_command({0.0, 0.0}, gains) == 0.0);
  // 1 m left of the path: steer right, back toward it.
  CHECK(steer_command({1.0, 0.0}, gains) == doctest::Approx(-0.1));
  // Vehicle pointing 0.2 rad left of the path heading: steer right to realign.
  CHECK(steer_command({0.0, -0.2}, gains) == doctest::Approx(-0.1));
  // Clamped for large errors.
  CHECK(steer_command({100.0, 0.0}, gains) == doctest::Approx(-0.6));
  CHECK(steer_command({-100.0, 0.0}, gains) == doctest::Approx(0.6));
}

TEST_CASE("steer command is odd in the error pair") {
  oracle::Rng rng(3);
  TrackingGains gains;
  gains.steer_limit = 1e9;  // inspect the unclamped law
  for (int i = 0; i < 100; ++i) {
    const TrackingError e{rng.uniform(-5, 5), rng.uniform(-3, 3)};
    const TrackingError neg{-e.lateral_deviation, -e.yaw_error};
    CHECK(steer_command(e, gains) == doctest::Approx(-steer_command(neg, gains)));
  }
}

TEST_CASE("speed command proportional with clamps") {
  TrackingGains gains;
  gains.accel_limit = 2.0;
  gains.decel_limit = 8.0;
  CHECK(speed_command(10.0, 10.0, gains, 0.01) == 0.0);
  CHECK(speed_command(10.0, 15.0, gains, 0.01) == doctest::Approx(2.0));
  CHECK(speed_command(20.0, 0.0, gains, 0.01) == doctest::Approx(-8.0));
  CHECK(speed_command(10.0, 10.5, gains, 0.01) == doctest::Approx(0.5));
}

TEST_CASE("commands respect clamps for arbitrary inputs") {
  oracle::Rng rng(17);
  TrackingGains gains;
  for (int i = 0; i < 300; ++i) {
    const double steer = steer_command({rng.uniform(-100, 100), rng.uniform(-3, 3)}, gains);
    CHECK(std::abs(steer) <= gains.steer_limit + 1e-12);
    const double accel = speed_command(rng.uniform(0, 40), rng.uniform(0, 40), gains, 0.01);
    CHECK(accel <= gains.accel_limit + 1e-12);
    CHECK(accel >= -gains.decel_limit - 1e-12);
  }
}

TEST_CASE("speed scaled preview") {
  CHECK(speed_scaled_preview(5.0, 10.0) == doctest::Approx(5.0));
  CHECK(speed_scaled_preview(5.0, 15.0) == doctest::Approx(5.0));
  CHECK(speed_scaled_preview(5.0, 25.0) == doctest::Approx(10.0));
}

TEST_CASE("closed loop converges from a 1 m offset and never diverges") {
  const PlannedPath path = straight_path(250.0);
  const TrackingGains gains;
  const VehicleParams params;
  VehiclePose pose{0.0, 1.0, 0.0, 10.0};
  const double dt = 0.01;
  double worst_after_100m = 0.0;
  double max_abs = 0.0;
  for (int step = 0; step < 2200; ++step) {
    const TrackingError err = compute_errors(path, pose, gains);
    ControlInput u;
    u.steering = steer_command(err, gains);
    u.accel = speed_command(pose.speed, 10.0, gains, dt);
    pose = step_dynamics(pose, u, params, dt);
    max_abs = std::max(max_abs, std::abs(pose.y));
    if (pose.x > 100.0) worst_after_100m = std::max(worst_after_100m, std::abs(pose.y));
    if (pose.x > 210.0) break;
  }
  CHECK(worst_after_100m < 0.1);
  CHECK(max_abs < 1.5);  // never diverges
}
