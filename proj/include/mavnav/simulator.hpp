#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mavnav/avoidance.hpp"
#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/mission.hpp"
#include "mavnav/planner.hpp"
#include "mavnav/sensing.hpp"
#include "mavnav/trajectory.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

struct SimConfig {
  double physics_dt = 0.005;       // 200 Hz plant
  double control_rate = 50.0;      // Hz
  double avoidance_rate = 10.0;    // Hz, lidar rate
  double localization_rate = 20.0; // Hz
  double localization_sigma = 0.0; // m, 0 = ground truth
  double climb_tau = 0.2;          // s, climb-rate lag

  AxisLimits limits{7.8, 3.5, 4.0};
  AvoidanceParams avoidance;
  ControlParams control;
  CameraModel camera;
  double rfid_throttle = 20.0;
  double rfid_range = 3.0;
  double visual_noise_sigma = 0.04;

  GridMode grid_mode = GridMode::kIsotropic;
  double grid_resolution = 0.25;
  double inflation_margin = 0.15;  // added to the MAV radius
  PlannerOptions planner;
  double rdp_epsilon = -1.0;  // <0: half the horizontal resolution
  ArrivalTolerance arrival;
  double replan_period = 10.0;

  Pose4 start;
  double timeout = 600.0;
  std::uint64_t seed = 0;

  void apply_scenario_defaults(const ScenarioWorld& world) {
    limits = {world.limits.v_max, world.limits.a_max, world.limits.j_max};
    if (world.avoidance.d_active) {
      avoidance.d_active = *world.avoidance.d_active;
    }
    if (world.avoidance.d_passive) {
      avoidance.d_passive = *world.avoidance.d_passive;
    }
    seed = world.seed;
  }
};

// --------------------------------------------------------------------------
// Plant

// Triple-integrator x/y under held acceleration commands; z follows the
// commanded climb rate through a first-order lag. Yaw-rate tracking is
// ideal. Exact integration over one step.
inline MavState step(const MavState& state, const Command& cmd,
                     const Vec3& disturbance_accel, double dt,
                     double climb_tau = 0.2) {
  MavState next = state;
  const auto lateral = [dt](AxisState& axis, double accel) {
    axis.p += axis.v * dt + 0.5 * accel * dt * dt;
    axis.v += accel * dt;
    axis.a = accel;
  };
  lateral(next.x, cmd.ax + disturbance_accel.x);
  lateral(next.y, cmd.ay + disturbance_accel.y);

  const double decay = std::exp(-dt / climb_tau);
  const double v0 = state.z.v;
  next.z.p += cmd.climb_rate * dt +
              (v0 - cmd.climb_rate) * climb_tau * (1.0 - decay) +
              0.5 * disturbance_accel.z * dt * dt;
  next.z.v = cmd.climb_rate + (v0 - cmd.climb_rate) * decay +
             disturbance_accel.z * dt;
  next.z.a = (cmd.climb_rate - next.z.v) / climb_tau + disturbance_accel.z;

  next.yaw = wrap_angle(state.yaw + cmd.yaw_rate * dt);
  next.yaw_rate = cmd.yaw_rate;
  next.t = state.t + dt;
  return next;
}

// Seeded Ornstein-Uhlenbeck acceleration disturbance with a hard cap.
class OuDisturbance {
 public:
  OuDisturbance(const DisturbanceConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed) {}

  Vec3 sample(double dt) {
    if (!cfg_.enabled || cfg_.sigma <= 0.0) {
      return {};
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double root_dt = std::sqrt(dt);
    const auto advance = [&](double a) {
      a += -cfg_.theta * a * dt + cfg_.sigma * root_dt * gauss(rng_);
      return std::clamp(a, -cfg_.cap, cfg_.cap);
    };
    state_.x = cfg_.on_x ? advance(state_.x) : 0.0;
    state_.y = cfg_.on_y ? advance(state_.y) : 0.0;
    state_.z = cfg_.on_z ? advance(state_.z) : 0.0;
    return state_;
  }

 private:
  DisturbanceConfig cfg_;
  std::mt19937_64 rng_;
  Vec3 state_;
};

// Localization stand-in: pose corrections at the localization rate (with
// optional position noise), model-based prediction in between. Acceleration
// is carried from the vehicle's own commands, which keeps replanning states
// within the planner's bounds regardless of external disturbances.
class StateEstimator {
 public:
  StateEstimator(const MavState& initial, double sigma, std::uint64_t seed,
                 double climb_tau)
      : est_(initial), sigma_(sigma), rng_(seed), climb_tau_(climb_tau) {}

  void predict(const Command& cmd, double dt) {
    est_ = step(est_, cmd, {}, dt, climb_tau_);
  }

  void correct(const MavState& truth) {
    const AxisState a_keep_x = est_.x;
    const AxisState a_keep_y = est_.y;
    est_ = truth;
    est_.x.a = a_keep_x.a;
    est_.y.a = a_keep_y.a;
    if (sigma_ > 0.0) {
      std::normal_distribution<double> gauss(0.0, sigma_);
      est_.x.p += gauss(rng_);
      est_.y.p += gauss(rng_);
      est_.z.p += gauss(rng_);
    }
  }

  const MavState& state() const { return est_; }

 private:
  MavState est_;
  double sigma_;
  std::mt19937_64 rng_;
  double climb_tau_;
};

// --------------------------------------------------------------------------
// Trace, events, metrics

struct SimEvent {
  double t = 0.0;
  std::string type;  // leg_start, waypoint_arrival, pose_arrival, pose_abort,
                     // replan, avoidance_active, brake, timeout
  int index = -1;
  Vec3 position;
};

struct AvoidanceLogEntry {
  double t = 0.0;
  Vec3 original_target;
  Vec3 adjusted_target;
  AvoidanceResult detail;
};

struct SimTrace {
  std::vector<double> times;
  std::vector<MavState> states;
  std::vector<Command> commands;
  std::vector<SimEvent> events;
};

struct Metrics {
  std::vector<double> arrival_deviation;
  double mean_arrival_deviation = 0.0;
  double max_straight_line_deviation = 0.0;
  double max_overshoot = 0.0;
  double peak_speed = 0.0;
  double min_clearance = std::numeric_limits<double>::infinity();
  double duration = 0.0;
  int poses_total = 0;
  int poses_reached = 0;
  bool completed = false;
};

struct PlannedPathRecord {
  double t = 0.0;
  int pose_index = -1;
  PlannedPath path;
};

struct RunResult {
  SimTrace trace;
  Metrics metrics;
  std::vector<Detection> detections;
  std::vector<AvoidanceLogEntry> avoidance_log;
  std::vector<PlannedPathRecord> planned_paths;
};

// Closest pass of the trace to each pose; used for reporting deviations
// against the full pre-merge view-pose list.
inline std::vector<double> pose_deviations(const SimTrace& trace,
                                           const std::vector<ViewPose>& poses) {
  std::vector<double> out(poses.size(),
                          std::numeric_limits<double>::infinity());
  for (const auto& state : trace.states) {
    const Vec3 p = state.position();
    for (std::size_t i = 0; i < poses.size(); ++i) {
      out[i] = std::min(out[i], (p - poses[i].pose.position).norm());
    }
  }
  return out;
}

// Post-hoc measurement over a finished trace. Leg windows are reconstructed
// from the leg_start / pose_arrival events.
inline Metrics compute_metrics(const SimTrace& trace,
                               const std::vector<ViewPose>& plan,
                               const ScenarioWorld& world) {
  Metrics m;
  m.poses_total = static_cast<int>(plan.size());
  if (trace.times.empty()) {
    m.completed = plan.empty();
    return m;
  }
  m.duration = trace.times.back() - trace.times.front();

  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    m.peak_speed = std::max(m.peak_speed, trace.states[k].velocity().norm());
  }
  const auto solids = world.all_solids();
  if (!solids.empty()) {
    for (std::size_t k = 0; k < trace.states.size(); ++k) {
      const auto hit = nearest_obstacle(trace.states[k].position(), solids,
                                        trace.times[k]);
      m.min_clearance = std::min(m.min_clearance, hit->distance);
    }
  }

  m.arrival_deviation.assign(plan.size(),
                             std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    const Vec3 p = trace.states[k].position();
    for (std::size_t i = 0; i < plan.size(); ++i) {
      m.arrival_deviation[i] =
          std::min(m.arrival_deviation[i], (p - plan[i].pose.position).norm());
    }
  }
  if (!plan.empty()) {
    double sum = 0.0;
    for (const double d : m.arrival_deviation) {
      sum += d;
    }
    m.mean_arrival_deviation = sum / static_cast<double>(plan.size());
  }

  // Leg windows: leg_start(i) opens a straight-line segment toward pose i
  // from the recorded position; pose_arrival(i) closes it.
  struct Window {
    Vec3 from, to;
    double t0 = 0.0, t1 = 0.0;
    int pose = -1;
  };
  std::vector<Window> windows;
  std::optional<Window> open;
  for (const auto& ev : trace.events) {
    if (ev.type == "leg_start" && ev.index >= 0 &&
        ev.index < static_cast<int>(plan.size())) {
      Window w;
      w.from = ev.position;
      w.to = plan[ev.index].pose.position;
      w.t0 = ev.t;
      w.pose = ev.index;
      open = w;
    } else if (ev.type == "pose_arrival" && open && ev.index == open->pose) {
      open->t1 = ev.t;
      windows.push_back(*open);
      open.reset();
      ++m.poses_reached;
    } else if (ev.type == "pose_abort") {
      open.reset();
    }
  }
  m.completed = m.poses_reached == m.poses_total;

  std::size_t cursor = 0;
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const auto& w = windows[wi];
    while (cursor < trace.times.size() && trace.times[cursor] < w.t0) {
      ++cursor;
    }
    std::size_t i = cursor;
    for (; i < trace.times.size() && trace.times[i] <= w.t1; ++i) {
      m.max_straight_line_deviation =
          std::max(m.max_straight_line_deviation,
                   point_segment_distance(trace.states[i].position(), w.from,
                                          w.to));
    }
    // Overshoot: excursion past the pose along the approach direction after
    // arrival. Legs whose successor continues in the same general direction
    // are deliberate fly-throughs, not overshoot.
    const Vec3 dir = (w.to - w.from).norm() > 1e-9
                         ? (w.to - w.from).normalized()
                         : Vec3{};
    if (wi + 1 < windows.size()) {
      const auto& nxt = windows[wi + 1];
      const Vec3 next_dir = (nxt.to - nxt.from).norm() > 1e-9
                                ? (nxt.to - nxt.from).normalized()
                                : Vec3{};
      if (dir.dot(next_dir) > 0.25) {
        continue;
      }
    }
    for (std::size_t k = i;
         k < trace.times.size() && trace.times[k] <= w.t1 + 2.0; ++k) {
      m.max_overshoot =
          std::max(m.max_overshoot,
                   (trace.states[k].position() - w.to).dot(dir));
    }
  }
  m.max_overshoot = std::max(m.max_overshoot, 0.0);
  return m;
}

// --------------------------------------------------------------------------
// Mission executor

namespace detail {

inline std::optional<Vec3> nearest_free_position(const OccupancyGrid& grid,
                                                 const Vec3& p,
                                                 int max_ring = 3) {
  const CellIndex c = grid.world_to_cell(p);
  if (grid.in_bounds(c) && !grid.occupied(c)) {
    return p;
  }
  for (int ring = 1; ring <= max_ring; ++ring) {
    for (int dz = -ring; dz <= ring; ++dz) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) {
            continue;
          }
          const CellIndex n{c.x + dx, c.y + dy, c.z + dz};
          if (grid.in_bounds(n) && !grid.occupied(n)) {
            return grid.cell_center(n);
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

class Simulator {
 public:
  Simulator(const ScenarioWorld& world, SimConfig config)
      : world_(world), config_(std::move(config)) {
    const double inflation = world.mav_radius + config_.inflation_margin;
    grid_ = inflate(rasterize(world, config_.grid_resolution,
                              config_.grid_mode),
                    inflation);
    rdp_epsilon_ = config_.rdp_epsilon >= 0.0
                       ? config_.rdp_epsilon
                       : 0.5 * config_.grid_resolution;
  }

  const OccupancyGrid& grid() const { return grid_; }

  // Full stack: mission poses -> A* (replanned per policy) -> RDP ->
  // avoidance at 10 Hz -> closed-loop control at 50 Hz -> plant at 200 Hz,
  // with camera / RFID / localization at their own rates.
  RunResult run_mission(const std::vector<ViewPose>& plan) {
    RunResult result;
    MavState truth = MavState::at_rest(config_.start.position,
                                       config_.start.yaw);
    StateEstimator estimator(truth, config_.localization_sigma,
                             config_.seed ^ 0x9E3779B97F4A7C15ull,
                             config_.climb_tau);
    OuDisturbance gusts(world_.disturbance, config_.seed);
    std::mt19937_64 camera_rng(config_.seed ^ 0xC2B2AE3D27D4EB4Full);
    RfidReader rfid(config_.rfid_throttle, config_.rfid_range);
    ReplanPolicy policy(config_.replan_period);

    const int control_every = ticks_per(config_.control_rate);
    const int avoidance_every = ticks_per(config_.avoidance_rate);
    const int localization_every = ticks_per(config_.localization_rate);
    const double camera_period = 1.0 / config_.camera.frame_rate;
    double next_camera = 0.0;

    std::size_t pose_idx = 0;
    std::vector<Vec3> waypoints;
    std::size_t wp_idx = 0;
    Vec3 current_target = truth.position();
    Vec3 adjusted_target = current_target;
    bool leg_open = false;
    Command cmd;

    const auto log_event = [&](double t, const std::string& type, int index,
                               const Vec3& pos) {
      result.trace.events.push_back({t, type, index, pos});
    };

    // Skip unreachable poses up front rather than mid-flight.
    const auto try_plan = [&](double t, const Vec3& from) -> bool {
      while (pose_idx < plan.size()) {
        const auto& pose = plan[pose_idx].pose;
        try {
          const auto start_free =
              detail::nearest_free_position(grid_, from);
          if (!start_free) {
            throw PoseError("run_mission: vehicle inside inflated space");
          }
          PlannedPath path = mavnav::plan(grid_, *start_free, pose.position,
                                          config_.grid_mode, config_.planner);
          // Pin the exact endpoints, then cull: straight legs collapse onto
          // the exact start-goal line instead of riding quantized centers.
          path.waypoints.front() = from;
          if ((path.waypoints.back() - pose.position).norm() > 1e-9) {
            path.waypoints.push_back(pose.position);
          }
          path = simplify(path, rdp_epsilon_);
          waypoints = path.waypoints;
          wp_idx = 0;
          policy.mark_planned(t);
          result.planned_paths.push_back(
              {t, static_cast<int>(pose_idx), path});
          log_event(t, "replan", static_cast<int>(pose_idx), from);
          if (!leg_open) {
            log_event(t, "leg_start", static_cast<int>(pose_idx), from);
            leg_open = true;
          }
          return true;
        } catch (const Error&) {
          log_event(t, "pose_abort", static_cast<int>(pose_idx),
                    pose.position);
          leg_open = false;
          ++pose_idx;
        }
      }
      return false;
    };

    if (plan.empty()) {
      record(result.trace, 0.0, truth, cmd);
      result.metrics = compute_metrics(result.trace, plan, world_);
      return result;
    }
    bool completed = false;
    double settle_until = -1.0;
    const long max_steps =
        static_cast<long>(std::ceil(config_.timeout / config_.physics_dt));
    for (long k = 0; k <= max_steps; ++k) {
      const double t = k * config_.physics_dt;

      if (k % localization_every == 0) {
        estimator.correct(truth);
      }
      const MavState& est = estimator.state();

      if (k % control_every == 0 && !completed) {
        if (waypoints.empty() && pose_idx < plan.size()) {
          if (!try_plan(t, est.position())) {
            break;  // nothing plannable remains
          }
          if (pose_idx >= plan.size()) {
            break;
          }
          adjusted_target = waypoints.empty() ? est.position()
                                              : waypoints[wp_idx];
        }
        if (pose_idx < plan.size()) {
          // Waypoint and pose arrival handling.
          bool pose_advanced = false;
          if (!waypoints.empty()) {
            while (wp_idx + 1 < waypoints.size() &&
                   (est.position() - waypoints[wp_idx]).norm() <=
                       config_.arrival.position) {
              ++wp_idx;
              log_event(t, "waypoint_arrival", static_cast<int>(wp_idx),
                        waypoints[wp_idx - 1]);
            }
            if (wp_idx + 1 == waypoints.size() &&
                pose_reached(est, plan[pose_idx].pose, config_.arrival)) {
              log_event(t, "pose_arrival", static_cast<int>(pose_idx),
                        plan[pose_idx].pose.position);
              leg_open = false;
              ++pose_idx;
              pose_advanced = true;
              if (pose_idx >= plan.size()) {
                // Keep the last pose as the control goal and let the
                // vehicle settle on it before ending the run.
                settle_until = t + 5.0;
                completed = true;
              } else {
                waypoints.clear();
              }
            }
          }
          if (!completed && policy.due(t, pose_advanced)) {
            if (!try_plan(t, est.position())) {
              break;
            }
            if (pose_idx >= plan.size()) {
              break;
            }
          }
        }
        if (!waypoints.empty()) {
          current_target = waypoints[wp_idx];
        }
      }

      if (k % avoidance_every == 0) {
        const auto tick = avoidance_tick(est.position(), current_target,
                                         world_, t, config_.avoidance);
        adjusted_target = tick.adjusted_target;
        result.avoidance_log.push_back(
            {t, current_target, tick.adjusted_target, tick.detail});
        if (tick.detail.active) {
          log_event(t, "avoidance_active",
                    static_cast<int>(tick.detail.per_obstacle.size()),
                    tick.adjusted_target);
        }
      }

      if (k % control_every == 0) {
        ControlGoal goal;
        goal.pose = Pose4::make(adjusted_target,
                                pose_idx < plan.size()
                                    ? plan[pose_idx].pose.yaw
                                    : plan.back().pose.yaw);
        try {
          cmd = control_step(est, goal, config_.limits, config_.control);
        } catch (const Error&) {
          // Degenerate replan state: brake and retry next tick.
          cmd = Command{};
          cmd.ax = -std::clamp(est.x.v / config_.control.dt,
                               -config_.limits.a_max, config_.limits.a_max);
          cmd.ay = -std::clamp(est.y.v / config_.control.dt,
                               -config_.limits.a_max, config_.limits.a_max);
          cmd.climb_rate = 0.0;
          cmd.yaw_rate = 0.0;
          log_event(t, "brake", -1, est.position());
        }
      }

      if (t + 1e-9 >= next_camera) {
        const Vec3 bias = est.position() - truth.position();
        const auto dets = visual_detect(truth, config_.camera, world_.tags,
                                        world_.all_solids(), t, camera_rng,
                                        config_.visual_noise_sigma, bias);
        result.detections.insert(result.detections.end(), dets.begin(),
                                 dets.end());
        next_camera += camera_period;
      }
      {
        MavState reported = truth;
        reported.x.p = est.x.p;
        reported.y.p = est.y.p;
        reported.z.p = est.z.p;
        const auto reads = rfid.tick(reported, world_.tags, t);
        result.detections.insert(result.detections.end(), reads.begin(),
                                 reads.end());
      }

      record(result.trace, t, truth, cmd);
      const Vec3 gust = gusts.sample(config_.physics_dt);
      truth = step(truth, cmd, gust, config_.physics_dt, config_.climb_tau);
      estimator.predict(cmd, config_.physics_dt);

      if (completed) {
        const double err =
            (truth.position() - plan.back().pose.position).norm();
        if ((truth.velocity().norm() < 0.02 && err < 0.05) ||
            t >= settle_until) {
          record(result.trace, t + config_.physics_dt, truth, cmd);
          break;
        }
      }
      if (k == max_steps) {
        log_event(t, "timeout", -1, truth.position());
      }
    }

    result.metrics = compute_metrics(result.trace, plan, world_);
    return result;
  }

  // Continuous tracking of a moving waypoint along a figure-eight curve.
  struct FigureEightParams {
    Vec3 center;
    double amp_x = 4.0;
    double amp_y = 2.4;
    // Lap period of 20.9 s is an exact multiple of every loop period, so
    // the avoidance/control sampling phases repeat lap for lap.
    double omega = 2.0 * kPi / 20.9;  // rad/s
    double z = 1.5;
    int laps = 4;
  };

  struct FigureEightResult {
    RunResult run;
    double lap_spread = 0.0;  // max pointwise distance between laps
  };

  FigureEightResult figure_eight(const FigureEightParams& params) {
    FigureEightResult out;
    const auto curve = [&](double t) {
      MavState s;
      const double th = params.omega * t;
      s.x = {params.center.x + params.amp_x * std::sin(th),
             params.amp_x * params.omega * std::cos(th),
             -params.amp_x * params.omega * params.omega * std::sin(th)};
      s.y = {params.center.y + params.amp_y * std::sin(2.0 * th),
             2.0 * params.amp_y * params.omega * std::cos(2.0 * th),
             -4.0 * params.amp_y * params.omega * params.omega *
                 std::sin(2.0 * th)};
      s.z = {params.z, 0.0, 0.0};
      s.t = t;
      return s;
    };

    MavState truth = curve(0.0);
    truth.yaw = std::atan2(truth.y.v, truth.x.v);
    StateEstimator estimator(truth, config_.localization_sigma,
                             config_.seed ^ 0x9E3779B97F4A7C15ull,
                             config_.climb_tau);
    OuDisturbance gusts(world_.disturbance, config_.seed);
    const int control_every = ticks_per(config_.control_rate);
    const int avoidance_every = ticks_per(config_.avoidance_rate);
    const int localization_every = ticks_per(config_.localization_rate);

    // One lead-in lap lets the pursuit settle onto its equilibrium orbit
    // before the laps that count; the vehicle is "continuously flying" the
    // eight when measurement starts.
    const double lap_time = 2.0 * kPi / params.omega;
    const double total = (params.laps + 1) * lap_time;
    const long steps = static_cast<long>(std::round(total /
                                                    config_.physics_dt));
    // Waypoint lead on the schedule. Chasing the waypoint's future position
    // with stop-at-target semantics pursues the curve smoothly; planning to
    // the moving state itself makes the bang-bang replanner limit-cycle.
    const double lead = 0.6;
    Command cmd;
    Vec3 adjusted_target = curve(lead).position();
    for (long k = 0; k <= steps; ++k) {
      const double t = k * config_.physics_dt;
      if (k % localization_every == 0) {
        estimator.correct(truth);
      }
      const MavState& est = estimator.state();

      if (k % avoidance_every == 0) {
        const Vec3 waypoint = curve(t + lead).position();
        const auto tick = avoidance_tick(est.position(), waypoint, world_, t,
                                         config_.avoidance);
        adjusted_target = tick.adjusted_target;
        out.run.avoidance_log.push_back(
            {t, waypoint, tick.adjusted_target, tick.detail});
      }

      if (k % control_every == 0) {
        const double yaw_setp =
            std::atan2(curve(t).y.v, curve(t).x.v);
        ControlGoal goal;
        goal.pose = Pose4::make(adjusted_target, yaw_setp);
        cmd = control_step(est, goal, config_.limits, config_.control);
      }

      record(out.run.trace, t, truth, cmd);
      const Vec3 gust = gusts.sample(config_.physics_dt);
      truth = step(truth, cmd, gust, config_.physics_dt, config_.climb_tau);
      estimator.predict(cmd, config_.physics_dt);
    }

    out.run.metrics = compute_metrics(out.run.trace, {}, world_);

    // Lap-to-lap repeatability over the measured laps (lead-in excluded):
    // pointwise spread at matching phase against the first measured lap.
    const long per_lap = static_cast<long>(std::round(lap_time /
                                                      config_.physics_dt));
    for (int lap = 2; lap <= params.laps; ++lap) {
      for (long i = 0; i < per_lap; ++i) {
        const std::size_t a = static_cast<std::size_t>(per_lap + i);
        const std::size_t b = static_cast<std::size_t>(lap * per_lap + i);
        if (b >= out.run.trace.states.size()) {
          break;
        }
        out.lap_spread = std::max(
            out.lap_spread, (out.run.trace.states[a].position() -
                             out.run.trace.states[b].position())
                                .norm());
      }
    }
    return out;
  }

 private:
  int ticks_per(double rate_hz) const {
    return std::max(1, static_cast<int>(std::round(1.0 /
                                                   (rate_hz *
                                                    config_.physics_dt))));
  }

  static void record(SimTrace& trace, double t, const MavState& s,
                     const Command& cmd) {
    trace.times.push_back(t);
    trace.states.push_back(s);
    trace.commands.push_back(cmd);
  }

  ScenarioWorld world_;
  SimConfig config_;
  OccupancyGrid grid_;
  double rdp_epsilon_ = 0.125;
};

}  // namespace mavnav
