#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

// Two concentric influence radii around the MAV. Obstacles inside the
// passive sphere damp motion toward them; inside the active sphere they add
// a repulsive displacement. Radii are measured from the MAV center to the
// obstacle surface, so the vehicle radius is folded into both.
struct AvoidanceParams {
  double d_active = 1.85;   // MAV radius 0.85 m + 1 m
  double d_passive = 2.85;  // MAV radius 0.85 m + 2 m
  double normalization_radius = 1.0;

  void validate() const {
    if (!(0.0 < d_active && d_active < d_passive)) {
      throw ConstraintError("avoidance: need 0 < d_active < d_passive");
    }
    if (!(normalization_radius > 0.0)) {
      throw ConstraintError("avoidance: normalization radius must be > 0");
    }
  }
};

struct ScaleFactors {
  double reduce = 0.0;  // ramps 0 -> 1 across the passive sphere
  double push = 0.0;    // ramps 0 -> 1 across the active sphere
};

inline ScaleFactors scale_factors(double distance,
                                  const AvoidanceParams& params) {
  params.validate();
  ScaleFactors s;
  s.reduce = std::clamp(
      (params.d_passive - distance) / (params.d_passive - params.d_active),
      0.0, 1.0);
  s.push = std::clamp((params.d_active - distance) / params.d_active, 0.0,
                      1.0);
  return s;
}

struct ObstacleInput {
  double distance = 0.0;
  Vec3 direction;  // unit vector from the MAV toward the obstacle
};

struct ObstacleDiag {
  double distance = 0.0;
  Vec3 direction;
  ScaleFactors factors;
  Vec3 toward_component;    // c_o: part of the target aimed at the obstacle
  Vec3 repulsive_direction; // f_o
};

struct AvoidanceResult {
  Vec3 target;  // adjusted egocentric target
  std::vector<ObstacleDiag> per_obstacle;
  bool active = false;  // any obstacle inside the passive sphere
};

// Egocentric target modification. Far targets are first normalized so the
// correction scale is independent of waypoint distance; per obstacle the
// component toward it is reduced and a repulsive displacement added; the
// summed result is clamped back to the normalization radius so stacked
// pushes cannot command an infeasible step.
inline AvoidanceResult adjust_target(const Vec3& t_orig,
                                     const std::vector<ObstacleInput>& obstacles,
                                     const AvoidanceParams& params = {}) {
  params.validate();
  AvoidanceResult res;
  const double r = params.normalization_radius;
  Vec3 t_in = t_orig;
  if (t_in.norm() > r) {
    t_in = t_in * (r / t_in.norm());
  }
  res.target = t_in;
  for (const auto& o : obstacles) {
    if (o.distance >= params.d_passive) {
      continue;
    }
    ObstacleDiag diag;
    diag.distance = o.distance;
    diag.direction = o.direction;
    diag.factors = scale_factors(o.distance, params);
    diag.toward_component =
        o.direction * std::max(0.0, t_in.dot(o.direction));
    diag.repulsive_direction = -o.direction;
    res.target -= diag.toward_component * diag.factors.reduce;
    res.target += diag.repulsive_direction * diag.factors.push;
    res.per_obstacle.push_back(diag);
    res.active = true;
  }
  if (res.target.norm() > r) {
    res.target = res.target * (r / res.target.norm());
  }
  return res;
}

struct AvoidanceTick {
  Vec3 adjusted_target;  // allocentric
  AvoidanceResult detail;
};

// 10 Hz safety layer: modifies the allocentric target waypoint against every
// obstacle the lidar can see (static and dynamic, +/-15 degrees vertical).
// With both spheres clear the planner's command passes through unaltered.
inline AvoidanceTick avoidance_tick(const Vec3& mav_position,
                                    const Vec3& allocentric_target,
                                    const ScenarioWorld& world, double time,
                                    const AvoidanceParams& params = {}) {
  params.validate();
  const auto hits = obstacle_hits(mav_position, world.all_solids(), time,
                                  kLidarFovDeg);
  std::vector<ObstacleInput> inputs;
  inputs.reserve(hits.size());
  bool any_in_passive = false;
  for (const auto& h : hits) {
    inputs.push_back({h.distance, h.direction});
    any_in_passive |= h.distance < params.d_passive;
  }
  AvoidanceTick tick;
  if (!any_in_passive) {
    tick.adjusted_target = allocentric_target;
    tick.detail.target = allocentric_target - mav_position;
    return tick;
  }
  tick.detail = adjust_target(allocentric_target - mav_position, inputs,
                              params);
  tick.adjusted_target = mav_position + tick.detail.target;
  return tick;
}

}  // namespace mavnav
