#pragma once

#include <vector>

namespace clsid {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  bool operator==(const Pose2&) const = default;
};

/// Vertical cylinder obstacle.
struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.1;

  bool operator==(const Obstacle&) const = default;
};

/// Axis-aligned region the robot may only cross with height <= hmax.
struct HeightRegion {
  double xmin = 0.0;
  double xmax = 0.0;
  double ymin = 0.0;
  double ymax = 0.0;
  double hmax = 0.8;

  /// True if (x, y) lies inside the region grown by @p expand on every side.
  bool contains(double x, double y, double expand = 0.0) const;

  bool operator==(const HeightRegion&) const = default;
};

struct Scenario {
  double robot_radius = 0.4;
  /// Extra clearance added to the robot radius by the planner only; the
  /// collision check uses the bare radius.
  double safety_buffer = 0.1;
  std::vector<Obstacle> obstacles;
  std::vector<HeightRegion> height_regions;
  Pose2 start;
  Pose2 goal;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  /// validate() without the goal-clearance invariant. The planner absorbs an
  /// unreachable goal through its terminal slack.
  void validate_geometry() const;

  double planning_radius() const { return robot_radius + safety_buffer; }

  bool operator==(const Scenario&) const = default;
};

/// Two obstacles flanking the direct route with a low-clearance region
/// between them; start at the origin facing +x, goal 8 m ahead.
Scenario arch_scenario();

}  // namespace clsid
