#pragma once

#include <Eigen/Core>

#include "clsid/planning/scenario.hpp"

namespace clsid {

/// Squared-distance separation (x-xo)^2 + (y-yo)^2 - (R + r)^2; positive
/// when the robot disc of radius @p robot_radius and the obstacle are apart.
double obstacle_distance(double x, double y, const Obstacle& obstacle, double robot_radius);

/// Gradient of obstacle_distance with respect to (x, y).
Eigen::Vector2d obstacle_distance_gradient(double x, double y, const Obstacle& obstacle);

/// Euclidean gap between the robot disc and the obstacle disc (m).
double clearance(double x, double y, const Obstacle& obstacle, double robot_radius);

/// One explicit-Euler step of planar motion with body-frame velocities
/// (vx forward, vy left) rotated by the current yaw.
Pose2 rollout_kinematics(const Pose2& pose, double vx, double vy, double wyaw, double dt);

/// Jacobian of rollout_kinematics with respect to (x, y, yaw, vx, vy, wyaw), 3 x 6.
Eigen::Matrix<double, 3, 6> rollout_jacobian(const Pose2& pose, double vx, double vy, double dt);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace clsid
