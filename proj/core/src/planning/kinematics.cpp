#include "clsid/planning/kinematics.hpp"

#include <cmath>
#include <numbers>

namespace clsid {

double obstacle_distance(double x, double y, const Obstacle& obstacle, double robot_radius) {
  const double dx = x - obstacle.x;
  const double dy = y - obstacle.y;
  const double reach = robot_radius + obstacle.r;
  return dx * dx + dy * dy - reach * reach;
}

Eigen::Vector2d obstacle_distance_gradient(double x, double y, const Obstacle& obstacle) {
  return {2.0 * (x - obstacle.x), 2.0 * (y - obstacle.y)};
}

double clearance(double x, double y, const Obstacle& obstacle, double robot_radius) {
  return std::hypot(x - obstacle.x, y - obstacle.y) - robot_radius - obstacle.r;
}

Pose2 rollout_kinematics(const Pose2& pose, double vx, double vy, double wyaw, double dt) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  return {pose.x + (vx * c - vy * s) * dt, pose.y + (vx * s + vy * c) * dt,
          pose.yaw + wyaw * dt};
}

Eigen::Matrix<double, 3, 6> rollout_jacobian(const Pose2& pose, double vx, double vy, double dt) {
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  Eigen::Matrix<double, 3, 6> J = Eigen::Matrix<double, 3, 6>::Zero();
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  J(2, 2) = 1.0;
  J(0, 2) = (-vx * s - vy * c) * dt;
  J(1, 2) = (vx * c - vy * s) * dt;
  J(0, 3) = c * dt;
  J(0, 4) = -s * dt;
  J(1, 3) = s * dt;
  J(1, 4) = c * dt;
  J(2, 5) = dt;
  return J;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace clsid
