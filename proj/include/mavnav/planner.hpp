#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <vector>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/trajectory.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

// Eight planar flight directions plus "none" for the start node. Flight
// direction is part of the search state so heading changes can be penalized.
constexpr int kNumHeadings = 8;
constexpr int kHeadingNone = 8;

inline int heading_of(int dx, int dy) {
  static constexpr int table[3][3] = {
      {5, 6, 7},  // dx = -1: (dy -1, 0, +1)
      {4, -1, 0},
      {3, 2, 1},
  };
  return table[dx + 1][dy + 1];
}

inline int heading_difference(int a, int b) {
  const int d = std::abs(a - b) % kNumHeadings;
  return std::min(d, kNumHeadings - d);
}

struct PlanStats {
  std::size_t expanded = 0;
  std::size_t reexpansions = 0;
  double seconds = 0.0;
};

struct PlannedPath {
  std::vector<Vec3> waypoints;  // cell centers
  double cost = 0.0;
  PlanStats stats;
};

struct PlannerOptions {
  // Cost added when the planar heading changes by more than 45 degrees.
  // Negative means "2 x horizontal resolution".
  double direction_penalty = -1.0;
};

namespace detail {

struct Move {
  int dx, dy, dz;
  double length;
};

inline std::vector<Move> move_set(const OccupancyGrid& grid, GridMode mode) {
  std::vector<Move> moves;
  const double h = grid.horizontal_resolution();
  const double v = grid.vertical_resolution();
  for (int dz = -1; dz <= 1; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) {
          continue;
        }
        if (mode == GridMode::kVisibility && dx == 0 && dy == 0) {
          continue;  // no ascents or descents in place
        }
        const double len =
            std::sqrt((dx * dx + dy * dy) * h * h + dz * dz * v * v);
        moves.push_back({dx, dy, dz, len});
      }
    }
  }
  return moves;
}

}  // namespace detail

// A* over the occupancy grid with the flight direction as an extra planning
// dimension. Edge cost is metric length plus a penalty for heading changes
// beyond 45 degrees. In visibility mode every vertical step rides on a
// horizontal one, which bounds climb and descent to the sensor's 15 degrees.
inline PlannedPath plan(const OccupancyGrid& grid, const Vec3& start,
                        const Vec3& goal, GridMode mode,
                        const PlannerOptions& options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const double penalty = options.direction_penalty >= 0.0
                             ? options.direction_penalty
                             : 2.0 * grid.horizontal_resolution();

  const CellIndex start_cell = grid.world_to_cell(start);
  const CellIndex goal_cell = grid.world_to_cell(goal);
  const auto describe = [](const CellIndex& c) {
    std::ostringstream os;
    os << "(" << c.x << ", " << c.y << ", " << c.z << ")";
    return os.str();
  };
  if (!grid.in_bounds(start_cell) || grid.occupied(start_cell)) {
    throw PoseError("plan: start cell " + describe(start_cell) +
                    " is occupied or out of bounds");
  }
  if (!grid.in_bounds(goal_cell) || grid.occupied(goal_cell)) {
    throw PoseError("plan: goal cell " + describe(goal_cell) +
                    " is occupied or out of bounds");
  }

  PlannedPath path;
  if (start_cell == goal_cell) {
    path.waypoints = {grid.cell_center(goal_cell)};
    path.cost = 0.0;
    return path;
  }

  const auto moves = detail::move_set(grid, mode);
  const std::size_t n_cells = grid.cell_count();
  const std::size_t n_states = n_cells * (kNumHeadings + 1);
  std::vector<double> g(n_states, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> parent(n_states,
                                    std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint8_t> closed(n_states, 0);

  const auto state_id = [&](const CellIndex& c, int heading) {
    return grid.flat(c) * (kNumHeadings + 1) + heading;
  };
  const Vec3 goal_center = grid.cell_center(goal_cell);
  const auto heuristic = [&](const CellIndex& c) {
    return (grid.cell_center(c) - goal_center).norm();
  };

  using QueueEntry = std::pair<double, std::uint32_t>;  // (f, state)
  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      std::greater<QueueEntry>>
      open;

  const std::uint32_t start_id =
      static_cast<std::uint32_t>(state_id(start_cell, kHeadingNone));
  g[start_id] = 0.0;
  open.push({heuristic(start_cell), start_id});

  // First-goal-pop termination can return a cost one ulp above the true
  // float minimum when equal-cost paths tie, because the Euclidean heuristic
  // is only consistent up to rounding. Keep expanding inside a tiny f-band
  // above the incumbent so the exact minimum settles.
  std::uint32_t goal_state = std::numeric_limits<std::uint32_t>::max();
  double goal_cost = std::numeric_limits<double>::infinity();
  while (!open.empty()) {
    const auto [f, id] = open.top();
    if (goal_state != std::numeric_limits<std::uint32_t>::max() &&
        f > goal_cost + 1e-9 * (1.0 + std::abs(goal_cost))) {
      break;
    }
    open.pop();
    if (closed[id]) {
      continue;
    }
    const double g_id = g[id];
    closed[id] = 1;
    ++path.stats.expanded;

    const std::size_t flat = id / (kNumHeadings + 1);
    const int heading = static_cast<int>(id % (kNumHeadings + 1));
    CellIndex cell;
    cell.x = static_cast<int>(flat % grid.nx());
    cell.y = static_cast<int>((flat / grid.nx()) % grid.ny());
    cell.z = static_cast<int>(flat / (static_cast<std::size_t>(grid.nx()) *
                                      grid.ny()));
    if (cell == goal_cell) {
      if (g_id < goal_cost) {
        goal_cost = g_id;
        goal_state = id;
      }
      continue;
    }

    for (const auto& mv : moves) {
      const CellIndex next{cell.x + mv.dx, cell.y + mv.dy, cell.z + mv.dz};
      if (!grid.in_bounds(next) || grid.occupied(next)) {
        continue;
      }
      int next_heading = heading;
      double cost = mv.length;
      if (mv.dx != 0 || mv.dy != 0) {
        next_heading = heading_of(mv.dx, mv.dy);
        if (heading != kHeadingNone &&
            heading_difference(heading, next_heading) >= 2) {
          cost += penalty;
        }
      }
      const std::uint32_t next_id =
          static_cast<std::uint32_t>(state_id(next, next_heading));
      const double tentative = g_id + cost;
      if (tentative < g[next_id]) {
        if (closed[next_id]) {
          ++path.stats.reexpansions;
          closed[next_id] = 0;
        }
        g[next_id] = tentative;
        parent[next_id] = id;
        open.push({tentative + heuristic(next), next_id});
      }
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  path.stats.seconds = std::chrono::duration<double>(t1 - t0).count();
  if (goal_state == std::numeric_limits<std::uint32_t>::max()) {
    throw UnreachableError("plan: no path from " + describe(start_cell) +
                           " to " + describe(goal_cell));
  }

  path.cost = g[goal_state];
  std::vector<CellIndex> cells;
  for (std::uint32_t id = goal_state;
       id != std::numeric_limits<std::uint32_t>::max(); id = parent[id]) {
    const std::size_t flat = id / (kNumHeadings + 1);
    CellIndex c;
    c.x = static_cast<int>(flat % grid.nx());
    c.y = static_cast<int>((flat / grid.nx()) % grid.ny());
    c.z = static_cast<int>(flat / (static_cast<std::size_t>(grid.nx()) *
                                   grid.ny()));
    cells.push_back(c);
  }
  std::reverse(cells.begin(), cells.end());
  path.waypoints.reserve(cells.size());
  for (const auto& c : cells) {
    path.waypoints.push_back(grid.cell_center(c));
  }
  return path;
}

inline void write_path_csv(std::ostream& os, const PlannedPath& path) {
  os << "x,y,z\n";
  for (const auto& wp : path.waypoints) {
    os << wp.x << ',' << wp.y << ',' << wp.z << '\n';
  }
}

// --------------------------------------------------------------------------
// Ramer-Douglas-Peucker simplification

namespace detail {

inline void rdp_recurse(const std::vector<Vec3>& pts, std::size_t lo,
                        std::size_t hi, double epsilon,
                        std::vector<bool>& keep) {
  if (hi <= lo + 1) {
    return;
  }
  double worst = -1.0;
  std::size_t worst_idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
    if (d > worst) {
      worst = d;
      worst_idx = i;
    }
  }
  if (worst > epsilon) {
    keep[worst_idx] = true;
    rdp_recurse(pts, lo, worst_idx, epsilon, keep);
    rdp_recurse(pts, worst_idx, hi, epsilon, keep);
  }
}

}  // namespace detail

inline PlannedPath simplify(const PlannedPath& path, double epsilon) {
  if (epsilon < 0.0) {
    throw ConstraintError("simplify: epsilon must be >= 0");
  }
  if (path.waypoints.size() <= 2) {
    return path;
  }
  std::vector<bool> keep(path.waypoints.size(), false);
  keep.front() = true;
  keep.back() = true;
  detail::rdp_recurse(path.waypoints, 0, path.waypoints.size() - 1, epsilon,
                      keep);
  PlannedPath out;
  out.cost = path.cost;
  out.stats = path.stats;
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    if (keep[i]) {
      out.waypoints.push_back(path.waypoints[i]);
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Replanning policy: on pose arrival or at the latest every `period` seconds.

struct ArrivalTolerance {
  double position = 0.2;  // m
  double yaw = 0.15;      // rad
};

inline bool pose_reached(const MavState& state, const Pose4& pose,
                         const ArrivalTolerance& tol = {}) {
  return (state.position() - pose.position).norm() <= tol.position &&
         std::abs(wrap_angle(state.yaw - pose.yaw)) <= tol.yaw;
}

class ReplanPolicy {
 public:
  explicit ReplanPolicy(double period = 10.0) : period_(period) {}

  bool due(double now, bool target_reached) const {
    return target_reached || now - last_plan_ >= period_;
  }

  void mark_planned(double now) { last_plan_ = now; }

  double period() const { return period_; }

 private:
  double period_;
  double last_plan_ = -std::numeric_limits<double>::infinity();
};

}  // namespace mavnav
