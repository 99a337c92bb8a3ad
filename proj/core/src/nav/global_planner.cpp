#include "clsid/nav/global_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "clsid/error.hpp"

namespace clsid {

namespace {

struct Grid {
  double x0 = 0.0;
  double y0 = 0.0;
  double res = 0.1;
  int nx = 0;
  int ny = 0;
  std::vector<char> blocked;

  int index(int i, int j) const { return j * nx + i; }
  Eigen::Vector2d center(int i, int j) const { return {x0 + i * res, y0 + j * res}; }
  std::pair<int, int> cell(const Eigen::Vector2d& p) const {
    return {std::clamp(static_cast<int>(std::lround((p.x() - x0) / res)), 0, nx - 1),
            std::clamp(static_cast<int>(std::lround((p.y() - y0) / res)), 0, ny - 1)};
  }
};

bool inside_inflated(const Eigen::Vector2d& p, const std::vector<Obstacle>& obstacles,
                     double inflation) {
  return std::any_of(obstacles.begin(), obstacles.end(), [&](const Obstacle& o) {
    return std::hypot(p.x() - o.x, p.y() - o.y) < o.r + inflation;
  });
}

Grid build_grid(const Scenario& sc, const GridSpec& spec, double inflation) {
  double xmin = std::min(sc.start.x, sc.goal.x);
  double xmax = std::max(sc.start.x, sc.goal.x);
  double ymin = std::min(sc.start.y, sc.goal.y);
  double ymax = std::max(sc.start.y, sc.goal.y);
  for (const Obstacle& o : sc.obstacles) {
    xmin = std::min(xmin, o.x - o.r - inflation);
    xmax = std::max(xmax, o.x + o.r + inflation);
    ymin = std::min(ymin, o.y - o.r - inflation);
    ymax = std::max(ymax, o.y + o.r + inflation);
  }
  Grid g;
  g.res = spec.resolution;
  g.x0 = xmin - spec.border;
  g.y0 = ymin - spec.border;
  g.nx = static_cast<int>(std::ceil((xmax - xmin + 2.0 * spec.border) / g.res)) + 1;
  g.ny = static_cast<int>(std::ceil((ymax - ymin + 2.0 * spec.border) / g.res)) + 1;
  if (static_cast<long long>(g.nx) * g.ny > 50'000'000LL) {
    throw ValidationError("global_path: grid too large for the requested resolution");
  }
  g.blocked.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      g.blocked[g.index(i, j)] = inside_inflated(g.center(i, j), sc.obstacles, inflation) ? 1 : 0;
    }
  }
  return g;
}

std::vector<std::pair<int, int>> astar(const Grid& g, std::pair<int, int> start,
                                       std::pair<int, int> goal) {
  const int n = g.nx * g.ny;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<char> closed(n, 0);
  auto heuristic = [&](int i, int j) {
    const double dx = std::abs(i - goal.first);
    const double dy = std::abs(j - goal.second);
    return (dx + dy) + (std::sqrt(2.0) - 2.0) * std::min(dx, dy);
  };
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const int s = g.index(start.first, start.second);
  const int t = g.index(goal.first, goal.second);
  cost[s] = 0.0;
  open.emplace(heuristic(start.first, start.second), s);
  while (!open.empty()) {
    const int cur = open.top().second;
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == t) break;
    const int ci = cur % g.nx;
    const int cj = cur / g.nx;
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = ci + di;
        const int nj = cj + dj;
        if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny) continue;
        const int nb = g.index(ni, nj);
        if (g.blocked[nb] && nb != t) continue;
        // No corner cutting between two blocked cells.
        if (di != 0 && dj != 0 && (g.blocked[g.index(ci + di, cj)] || g.blocked[g.index(ci, cj + dj)])) {
          continue;
        }
        const double c = cost[cur] + ((di != 0 && dj != 0) ? std::sqrt(2.0) : 1.0);
        if (c < cost[nb]) {
          cost[nb] = c;
          parent[nb] = cur;
          open.emplace(c + heuristic(ni, nj), nb);
        }
      }
    }
  }
  if (!std::isfinite(cost[t])) return {};
  std::vector<std::pair<int, int>> cells;
  for (int c = t; c != -1; c = parent[c]) cells.emplace_back(c % g.nx, c / g.nx);
  std::reverse(cells.begin(), cells.end());
  return cells;
}

}  // namespace

double inflation_radius(const Scenario& scenario, const GridSpec& grid) {
  return scenario.robot_radius + grid.inflation_margin;
}

bool line_of_sight(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const std::vector<Obstacle>& obstacles, double inflation) {
  const Eigen::Vector2d d = b - a;
  const double len2 = d.squaredNorm();
  for (const Obstacle& o : obstacles) {
    const Eigen::Vector2d c(o.x, o.y);
    const double t = len2 > 0.0 ? std::clamp((c - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    if ((a + t * d - c).norm() < o.r + inflation) return false;
  }
  return true;
}

std::vector<Eigen::Vector2d> global_path(const Scenario& scenario, const GridSpec& grid) {
  scenario.validate_geometry();
  if (!(grid.resolution > 0.0)) throw ValidationError("global_path: resolution must be positive");
  if (grid.inflation_margin < 0.0) {
    throw ValidationError("global_path: inflation_margin must be non-negative");
  }
  const double inflation = inflation_radius(scenario, grid);
  const Eigen::Vector2d start(scenario.start.x, scenario.start.y);
  const Eigen::Vector2d goal(scenario.goal.x, scenario.goal.y);
  if (inside_inflated(start, scenario.obstacles, inflation)) {
    throw PlanningError("global_path: start lies inside an inflated obstacle");
  }
  if (inside_inflated(goal, scenario.obstacles, inflation)) {
    throw PlanningError("global_path: goal lies inside an inflated obstacle");
  }
  if (line_of_sight(start, goal, scenario.obstacles, inflation)) return {start, goal};

  const Grid g = build_grid(scenario, grid, inflation);
  const auto cells = astar(g, g.cell(start), g.cell(goal));
  if (cells.empty()) {
    throw PlanningError(fmt::format("global_path: no collision-free path at resolution {} m",
                                    grid.resolution));
  }
  std::vector<Eigen::Vector2d> raw{start};
  for (std::size_t k = 1; k + 1 < cells.size(); ++k) {
    raw.push_back(g.center(cells[k].first, cells[k].second));
  }
  raw.push_back(goal);

  std::vector<Eigen::Vector2d> path{start};
  std::size_t cur = 0;
  while (cur + 1 < raw.size()) {
    std::size_t next = cur + 1;
    for (std::size_t k = raw.size() - 1; k > cur + 1; --k) {
      if (line_of_sight(raw[cur], raw[k], scenario.obstacles, inflation)) {
        next = k;
        break;
      }
    }
    path.push_back(raw[next]);
    cur = next;
  }
  return path;
}

std::size_t furthest_visible(const std::vector<Eigen::Vector2d>& path, std::size_t from,
                             const Eigen::Vector2d& position,
                             const std::vector<Obstacle>& obstacles, double inflation) {
  for (std::size_t k = path.size(); k-- > from + 1;) {
    if (line_of_sight(position, path[k], obstacles, inflation)) return k;
  }
  return std::min(from, path.empty() ? 0 : path.size() - 1);
}

}  // namespace clsid
