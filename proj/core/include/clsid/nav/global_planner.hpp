#pragma once

#include <vector>

#include <Eigen/Core>

#include "clsid/planning/scenario.hpp"

namespace clsid {

struct GridSpec {
  double resolution = 0.1;
  /// Added to the robot radius when inflating obstacles.
  double inflation_margin = 0.1;
  /// Free border around the bounding box of start, goal and obstacles.
  double border = 1.0;
};

/// Clearance radius used for occupancy and line-of-sight tests.
double inflation_radius(const Scenario& scenario, const GridSpec& grid = {});

/// True if the segment a-b stays outside every obstacle grown by @p inflation.
bool line_of_sight(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const std::vector<Obstacle>& obstacles, double inflation);

/// Shortest 8-connected path on the inflated occupancy grid, pruned to the
/// waypoints needed for line of sight. Starts at the scenario start and ends
/// at its goal. PlanningError if either end is blocked or no path exists.
std::vector<Eigen::Vector2d> global_path(const Scenario& scenario, const GridSpec& grid = {});

/// Index of the furthest waypoint visible from @p position, searching from
/// @p from onward; returns @p from when none beyond it is visible.
std::size_t furthest_visible(const std::vector<Eigen::Vector2d>& path, std::size_t from,
                             const Eigen::Vector2d& position,
                             const std::vector<Obstacle>& obstacles, double inflation);

}  // namespace clsid
