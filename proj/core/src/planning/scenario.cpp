#include "clsid/planning/scenario.hpp"

#include <cmath>
#include <string>

#include "clsid/error.hpp"

namespace clsid {

bool HeightRegion::contains(double px, double py, double expand) const {
  return px >= xmin - expand && px <= xmax + expand && py >= ymin - expand &&
         py <= ymax + expand;
}

void Scenario::validate() const {
  validate_geometry();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    require(std::hypot(goal.x - o.x, goal.y - o.y) >= robot_radius + o.r, "goal",
            "lies inside obstacles[" + std::to_string(i) + "] inflated by the robot radius");
  }
}

void Scenario::validate_geometry() const {
  require(std::isfinite(robot_radius) && robot_radius > 0.0, "robot_radius", "must be > 0");
  require(std::isfinite(safety_buffer) && safety_buffer >= 0.0, "safety_buffer", "must be >= 0");
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    const std::string field = "obstacles[" + std::to_string(i) + "]";
    require(std::isfinite(o.x) && std::isfinite(o.y), field, "position must be finite");
    require(std::isfinite(o.r) && o.r > 0.0, field + ".r", "must be > 0");
  }
  for (std::size_t i = 0; i < height_regions.size(); ++i) {
    const auto& h = height_regions[i];
    const std::string field = "height_regions[" + std::to_string(i) + "]";
    require(h.xmin < h.xmax && h.ymin < h.ymax, field, "needs xmin < xmax and ymin < ymax");
    require(h.hmax > 0.65 && h.hmax <= 1.0, field + ".hmax", "must be in (0.65, 1.0]");
  }
  require(std::isfinite(start.x) && std::isfinite(start.y) && std::isfinite(start.yaw), "start",
          "must be finite");
  require(std::isfinite(goal.x) && std::isfinite(goal.y) && std::isfinite(goal.yaw), "goal",
          "must be finite");
}

Scenario arch_scenario() {
  Scenario s;
  s.robot_radius = 0.4;
  s.safety_buffer = 0.1;
  s.obstacles = {{4.0, 1.3, 0.5}, {4.0, -1.3, 0.5}};
  s.height_regions = {{3.5, 4.5, -0.7, 0.7, 0.8}};
  s.start = {0.0, 0.0, 0.0};
  s.goal = {8.0, 0.0, 0.0};
  return s;
}

}  // namespace clsid
