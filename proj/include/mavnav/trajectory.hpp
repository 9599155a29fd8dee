#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"

namespace mavnav {

constexpr double kGravity = 9.81;

struct AxisState {
  double p = 0.0;  // m
  double v = 0.0;  // m/s
  double a = 0.0;  // m/s^2

  void advance(double t, double jerk) {
    p += v * t + 0.5 * a * t * t + jerk * t * t * t / 6.0;
    v += a * t + 0.5 * jerk * t * t;
    a += jerk * t;
  }
};

struct AxisLimits {
  double v_max = 1.0;
  double a_max = 1.0;
  double j_max = 1.0;

  void validate() const {
    if (!(v_max > 0.0 && a_max > 0.0 && j_max > 0.0)) {
      throw ConstraintError("axis limits must be strictly positive");
    }
  }
};

struct JerkPhase {
  double duration = 0.0;
  double jerk = 0.0;
};

// Piecewise constant-jerk profile (at most 7 phases for an optimal plan).
struct AxisTrajectory {
  AxisState start;
  std::vector<JerkPhase> phases;

  double duration() const {
    double t = 0.0;
    for (const auto& ph : phases) {
      t += ph.duration;
    }
    return t;
  }

  AxisState state_at(double t) const {
    AxisState s = start;
    if (t <= 0.0) {
      return s;
    }
    for (const auto& ph : phases) {
      if (t <= ph.duration) {
        s.advance(t, ph.jerk);
        return s;
      }
      s.advance(ph.duration, ph.jerk);
      t -= ph.duration;
    }
    return s;  // past the end: hold final state
  }

  AxisState end_state() const {
    AxisState s = start;
    for (const auto& ph : phases) {
      s.advance(ph.duration, ph.jerk);
    }
    return s;
  }

  double jerk_at(double t) const {
    if (t < 0.0) {
      return 0.0;
    }
    for (const auto& ph : phases) {
      if (t < ph.duration) {
        return ph.jerk;
      }
      t -= ph.duration;
    }
    return 0.0;
  }
};

namespace detail {

constexpr double kTinyTime = 1e-12;

inline void append_phase(std::vector<JerkPhase>& phases, double duration,
                         double jerk) {
  if (duration <= kTinyTime) {
    return;
  }
  if (!phases.empty() && std::abs(phases.back().jerk - jerk) < 1e-12) {
    phases.back().duration += duration;
    return;
  }
  phases.push_back({duration, jerk});
}

// At most ramp / plateau / ramp; sized for the controller's 50 Hz replan loop.
struct SegPhases {
  std::array<JerkPhase, 3> phases{};
  int count = 0;

  void add(double duration, double jerk) {
    if (duration <= kTinyTime) {
      return;
    }
    if (count > 0 && std::abs(phases[count - 1].jerk - jerk) < 1e-12) {
      phases[count - 1].duration += duration;
      return;
    }
    phases[count++] = {duration, jerk};
  }
};

// Time-optimal bang-plateau-bang jerk profile changing (v_a, a_a) into
// (v_b, a_b) under |a| <= a_max, |j| <= j_max. The velocity bound is not
// consulted here; callers pick the junction velocities.
inline SegPhases velocity_change_phases(double va, double aa, double vb,
                                        double ab, double am, double jm) {
  SegPhases phases;
  const double ramp_area = 0.5 * (aa + ab) * std::abs(ab - aa) / jm;
  const double dv = vb - va;

  const double scale = std::max({1.0, std::abs(va), std::abs(vb)});
  if (std::abs(dv - ramp_area) <= 1e-13 * scale) {
    phases.add(std::abs(ab - aa) / jm, ab >= aa ? jm : -jm);
    return phases;
  }

  const double sigma = dv > ramp_area ? 1.0 : -1.0;
  const double s = sigma * jm * dv + 0.5 * (aa * aa + ab * ab);
  double peak = sigma * std::sqrt(std::max(s, 0.0));
  double plateau = 0.0;
  if (std::abs(peak) > am) {
    peak = sigma * am;
    const double area_in = 0.5 * (aa + peak) * std::abs(peak - aa) / jm;
    const double area_out = 0.5 * (peak + ab) * std::abs(ab - peak) / jm;
    plateau = (dv - area_in - area_out) / peak;
    plateau = std::max(plateau, 0.0);
  }
  phases.add(std::abs(peak - aa) / jm, peak >= aa ? jm : -jm);
  phases.add(plateau, 0.0);
  phases.add(std::abs(ab - peak) / jm, ab >= peak ? jm : -jm);
  return phases;
}

struct ProfileEval {
  double distance = 0.0;
  double duration = 0.0;
  SegPhases accel_phases;  // (v0, a0) -> (vc, 0)
  SegPhases decel_phases;  // (vc, 0) -> (vT, aT)
};

inline void measure(const SegPhases& phases, double v0, double a0,
                    double* dist, double* dur) {
  AxisState s{0.0, v0, a0};
  double t = 0.0;
  for (int i = 0; i < phases.count; ++i) {
    s.advance(phases.phases[i].duration, phases.phases[i].jerk);
    t += phases.phases[i].duration;
  }
  *dist = s.p;
  *dur = t;
}

}  // namespace detail

// Time-optimal single-axis plan from `start` to `target`.
//
// The profile family is the canonical 7-phase constant-jerk sequence and its
// degenerate collapses: an acceleration bang-plateau-bang taking the axis to
// a junction velocity v_c with zero acceleration, an optional cruise, and a
// closing bang-plateau-bang to the target state. The junction velocity is
// resolved in closed form where possible and by safeguarded bisection on the
// covered distance elsewhere.
//
// Start states up to 10% outside the velocity/acceleration bounds are
// accepted and recovered; target states must be within bounds.
inline AxisTrajectory plan_axis(const AxisState& start, const AxisState& target,
                                const AxisLimits& limits) {
  limits.validate();
  const double vm = limits.v_max;
  const double am = limits.a_max;
  const double jm = limits.j_max;

  const auto reject = [](const std::string& what) {
    throw ConstraintError("plan_axis: " + what);
  };
  if (!(std::isfinite(start.p) && std::isfinite(start.v) &&
        std::isfinite(start.a) && std::isfinite(target.p) &&
        std::isfinite(target.v) && std::isfinite(target.a))) {
    reject("non-finite boundary state");
  }
  const double tol = 1e-9;
  if (std::abs(target.v) > vm * (1.0 + tol)) {
    reject("target velocity " + std::to_string(target.v) +
           " exceeds v_max " + std::to_string(vm));
  }
  if (std::abs(target.a) > am * (1.0 + tol)) {
    reject("target acceleration " + std::to_string(target.a) +
           " exceeds a_max " + std::to_string(am));
  }
  if (std::abs(start.v) > vm * 1.1 + tol) {
    reject("start velocity " + std::to_string(start.v) +
           " exceeds v_max " + std::to_string(vm) + " by more than 10%");
  }
  if (std::abs(start.a) > am * 1.1 + tol) {
    reject("start acceleration " + std::to_string(start.a) +
           " exceeds a_max " + std::to_string(am) + " by more than 10%");
  }

  const double v0 = start.v;
  const double a0 = start.a;
  const double vt = std::clamp(target.v, -vm, vm);
  const double at = std::clamp(target.a, -am, am);
  const double dp = target.p - start.p;
  const double pos_eps = 1e-9 * std::max(1.0, std::abs(dp));

  const auto evaluate = [&](double vc) {
    detail::ProfileEval ev;
    ev.accel_phases = detail::velocity_change_phases(v0, a0, vc, 0.0, am, jm);
    ev.decel_phases = detail::velocity_change_phases(vc, 0.0, vt, at, am, jm);
    double d1 = 0.0, t1 = 0.0, d2 = 0.0, t2 = 0.0;
    detail::measure(ev.accel_phases, v0, a0, &d1, &t1);
    detail::measure(ev.decel_phases, vc, 0.0, &d2, &t2);
    ev.distance = d1 + d2;
    ev.duration = t1 + t2;
    return ev;
  };

  struct Candidate {
    double total_time = 0.0;
    double vc = 0.0;
    double cruise = 0.0;
    detail::ProfileEval eval;
  };
  std::vector<Candidate> candidates;

  const auto add_candidate = [&](double vc, const detail::ProfileEval& ev,
                                 double cruise) {
    if (cruise < 0.0) {
      return;
    }
    candidates.push_back({ev.duration + cruise, vc, cruise, ev});
  };

  // Direct maneuver: distance happens to match the pure velocity change.
  {
    const auto direct =
        detail::velocity_change_phases(v0, a0, vt, at, am, jm);
    double d = 0.0, t = 0.0;
    detail::measure(direct, v0, a0, &d, &t);
    if (std::abs(dp - d) <= pos_eps) {
      AxisTrajectory traj;
      traj.start = start;
      for (int i = 0; i < direct.count; ++i) {
        detail::append_phase(traj.phases, direct.phases[i].duration,
                             direct.phases[i].jerk);
      }
      return traj;
    }
  }

  const auto bisect_branch = [&](double lo, double hi) -> std::optional<double> {
    // Distance covered is monotone increasing in the junction velocity on
    // each branch; find D(vc) == dp.
    double d_lo = evaluate(lo).distance;
    double d_hi = evaluate(hi).distance;
    if (dp < d_lo - pos_eps || dp > d_hi + pos_eps) {
      return std::nullopt;
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double d = evaluate(mid).distance;
      if (std::abs(d - dp) <= pos_eps || hi - lo < 1e-15 * vm) {
        return mid;
      }
      if (d < dp) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  const double up_anchor = std::min(std::max(v0, vt), vm);
  const double dn_anchor = std::max(std::min(v0, vt), -vm);

  // Saturated cruise at +/- v_max.
  {
    const auto ev = evaluate(vm);
    if (dp >= ev.distance - pos_eps) {
      add_candidate(vm, ev, std::max(0.0, (dp - ev.distance) / vm));
    }
  }
  {
    const auto ev = evaluate(-vm);
    if (dp <= ev.distance + pos_eps) {
      add_candidate(-vm, ev, std::max(0.0, (dp - ev.distance) / -vm));
    }
  }
  // Interior peak with no cruise.
  if (up_anchor < vm) {
    if (const auto vc = bisect_branch(up_anchor, vm)) {
      const auto ev = evaluate(*vc);
      double cruise = 0.0;
      if (std::abs(*vc) > 1e-9) {
        cruise = (dp - ev.distance) / *vc;
      }
      add_candidate(*vc, ev, std::max(0.0, cruise));
    }
  }
  if (dn_anchor > -vm) {
    if (const auto vc = bisect_branch(-vm, dn_anchor)) {
      const auto ev = evaluate(*vc);
      double cruise = 0.0;
      if (std::abs(*vc) > 1e-9) {
        cruise = (dp - ev.distance) / *vc;
      }
      add_candidate(*vc, ev, std::max(0.0, cruise));
    }
  }

  if (candidates.empty()) {
    // Boundary accelerations can open a band of distances neither branch
    // covers. The covered distance is continuous on the interior interval
    // with D(dn_anchor) < dp < D(up_anchor), so a crossing exists there;
    // collect every sign change (D is not monotone between the anchors) and
    // refine each by bisection. Cruise variants of the anchors and a coarse
    // cruise grid complete the candidate set.
    const auto add_cruise_at = [&](double vc) {
      if (std::abs(vc) < 1e-9) {
        return;
      }
      const auto ev = evaluate(vc);
      const double cruise = (dp - ev.distance) / vc;
      if (cruise >= 0.0) {
        add_candidate(vc, ev, cruise);
      }
    };
    add_cruise_at(up_anchor);
    add_cruise_at(dn_anchor);
    const int grid = 1024;
    for (int i = 0; i <= grid; ++i) {
      add_cruise_at(-vm + 2.0 * vm * i / grid);
    }
    if (up_anchor > dn_anchor) {
      const int n = 2048;
      double prev_vc = dn_anchor;
      double prev_f = evaluate(prev_vc).distance - dp;
      for (int i = 1; i <= n; ++i) {
        const double vc = dn_anchor + (up_anchor - dn_anchor) * i / n;
        const double f = evaluate(vc).distance - dp;
        if (prev_f == 0.0 || prev_f * f < 0.0) {
          double a = prev_vc;
          double b = vc;
          double fa = prev_f;
          for (int it = 0; it < 120; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = evaluate(m).distance - dp;
            if (fa * fm <= 0.0) {
              b = m;
            } else {
              a = m;
              fa = fm;
            }
          }
          const double root = 0.5 * (a + b);
          const auto ev = evaluate(root);
          double cruise = 0.0;
          if (std::abs(root) > 1e-9) {
            cruise = std::max(0.0, (dp - ev.distance) / root);
          }
          add_candidate(root, ev, cruise);
        }
        prev_vc = vc;
        prev_f = f;
      }
    }
    if (candidates.empty()) {
      reject("no feasible profile for displacement " + std::to_string(dp));
    }
  }

  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.total_time < best->total_time) {
      best = &c;
    }
  }

  AxisTrajectory traj;
  traj.start = start;
  const auto& acc = best->eval.accel_phases;
  for (int i = 0; i < acc.count; ++i) {
    detail::append_phase(traj.phases, acc.phases[i].duration,
                         acc.phases[i].jerk);
  }
  detail::append_phase(traj.phases, best->cruise, 0.0);
  const auto& dec = best->eval.decel_phases;
  for (int i = 0; i < dec.count; ++i) {
    detail::append_phase(traj.phases, dec.phases[i].duration,
                         dec.phases[i].jerk);
  }
  return traj;
}

// --------------------------------------------------------------------------
// Multi-axis coupling

struct Trajectory3D {
  std::array<AxisTrajectory, 3> axes;
  double total_duration = 0.0;

  std::array<AxisState, 3> state_at(double t) const {
    return {axes[0].state_at(t), axes[1].state_at(t), axes[2].state_at(t)};
  }

  std::array<AxisState, 3> end_state() const {
    return {axes[0].end_state(), axes[1].end_state(), axes[2].end_state()};
  }
};

constexpr double kSyncTolerance = 1e-4;  // s

// Stretch every faster axis to the slowest axis's duration by bisecting a
// v_max scale factor; degenerate axes that already sit at rest get a hold
// phase instead.
inline Trajectory3D synchronize(const std::array<AxisTrajectory, 3>& axes,
                                const AxisLimits& limits) {
  Trajectory3D out;
  out.axes = axes;
  double target_time = 0.0;
  for (const auto& ax : axes) {
    target_time = std::max(target_time, ax.duration());
  }
  out.total_duration = target_time;

  for (auto& ax : out.axes) {
    const double t_opt = ax.duration();
    if (target_time - t_opt <= kSyncTolerance) {
      continue;
    }
    const AxisState goal = ax.end_state();
    const bool rest_end =
        std::abs(goal.v) < 1e-9 && std::abs(goal.a) < 1e-9;

    const double v_floor =
        std::max(std::abs(ax.start.v), std::abs(goal.v)) / limits.v_max;
    double lo = std::min(1.0, std::max(v_floor + 1e-9, 1e-9));
    double hi = 1.0;

    const auto replan = [&](double scale) {
      AxisLimits scaled = limits;
      scaled.v_max = limits.v_max * scale;
      return plan_axis(ax.start, goal, scaled);
    };

    bool stretched = false;
    if (lo < hi) {
      AxisTrajectory low_traj;
      double t_lo = 0.0;
      bool lo_ok = true;
      try {
        low_traj = replan(lo);
        t_lo = low_traj.duration();
      } catch (const ConstraintError&) {
        lo_ok = false;
      }
      if (lo_ok && t_lo >= target_time - kSyncTolerance) {
        // Duration is monotone non-increasing in the scale factor.
        AxisTrajectory best = low_traj;
        for (int i = 0; i < 100; ++i) {
          const double mid = 0.5 * (lo + hi);
          AxisTrajectory cand = replan(mid);
          const double t_mid = cand.duration();
          if (std::abs(t_mid - target_time) <= kSyncTolerance) {
            best = cand;
            stretched = true;
            break;
          }
          if (t_mid > target_time) {
            lo = mid;
            best = cand;
          } else {
            hi = mid;
          }
        }
        if (!stretched &&
            std::abs(best.duration() - target_time) <= kSyncTolerance) {
          stretched = true;
        }
        if (stretched) {
          ax = best;
          continue;
        }
      }
    }
    if (!stretched) {
      if (rest_end) {
        detail::append_phase(ax.phases, target_time - t_opt, 0.0);
      } else {
        std::ostringstream msg;
        msg << "synchronize: axis with end velocity " << goal.v
            << " cannot be stretched from " << t_opt << " s to "
            << target_time << " s";
        throw SyncError(msg.str());
      }
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Vehicle state and closed-loop commands

struct MavState {
  AxisState x;
  AxisState y;
  AxisState z;
  double yaw = 0.0;
  double yaw_rate = 0.0;
  double t = 0.0;

  Vec3 position() const { return {x.p, y.p, z.p}; }
  Vec3 velocity() const { return {x.v, y.v, z.v}; }
  Vec3 acceleration() const { return {x.a, y.a, z.a}; }

  static MavState at_rest(const Vec3& pos, double yaw = 0.0) {
    MavState s;
    s.x.p = pos.x;
    s.y.p = pos.y;
    s.z.p = pos.z;
    s.yaw = wrap_angle(yaw);
    return s;
  }
};

inline Trajectory3D plan_to(const MavState& current,
                            const std::array<AxisState, 3>& target,
                            const AxisLimits& limits) {
  std::array<AxisTrajectory, 3> axes = {
      plan_axis(current.x, target[0], limits),
      plan_axis(current.y, target[1], limits),
      plan_axis(current.z, target[2], limits)};
  return synchronize(axes, limits);
}

struct InterceptResult {
  Trajectory3D trajectory;
  double interception_time = 0.0;
  bool converged = true;
  bool synced = true;
  int iterations = 0;
};

// Plan toward a moving target: fixed-point iteration on the total duration
// against the target state evaluated at that future time. Targets moving on
// a curve can pin nonzero end velocities that no v_max rescaling can slow
// down; those iterates fall back to unsynchronized per-axis optima, which a
// closed-loop caller re-coordinates by replanning.
inline InterceptResult intercept(
    const MavState& start, const std::function<MavState(double)>& target_fn,
    const AxisLimits& limits, int max_iters = 20, double tol = 1e-3) {
  InterceptResult res;
  double horizon = 0.0;
  for (int k = 0; k < max_iters; ++k) {
    const MavState goal = target_fn(horizon);
    const std::array<AxisTrajectory, 3> axes = {
        plan_axis(start.x, goal.x, limits),
        plan_axis(start.y, goal.y, limits),
        plan_axis(start.z, goal.z, limits)};
    try {
      res.trajectory = synchronize(axes, limits);
      res.synced = true;
    } catch (const SyncError&) {
      res.trajectory.axes = axes;
      res.trajectory.total_duration =
          std::max({axes[0].duration(), axes[1].duration(),
                    axes[2].duration()});
      res.synced = false;
    }
    res.iterations = k + 1;
    const double next = res.trajectory.total_duration;
    if (std::abs(next - horizon) < tol) {
      res.interception_time = next;
      res.converged = true;
      return res;
    }
    horizon = next;
  }
  res.interception_time = horizon;
  res.converged = false;
  return res;
}

// Proportional yaw-rate command on the wrapped heading error.
inline double yaw_control(double yaw, double yaw_setpoint, double kp,
                          double max_rate = 1.0) {
  const double rate = kp * wrap_angle(yaw_setpoint - yaw);
  return std::clamp(rate, -max_rate, max_rate);
}

struct Command {
  double ax = 0.0;          // m/s^2
  double ay = 0.0;          // m/s^2
  double climb_rate = 0.0;  // m/s
  double yaw_rate = 0.0;    // rad/s

  // Small-angle attitude view of the lateral acceleration setpoints.
  double pitch() const { return std::atan(ax / kGravity); }
  double roll() const { return -std::atan(ay / kGravity); }

  bool operator==(const Command&) const = default;
};

struct ControlGoal {
  Pose4 pose;
  Vec3 velocity;  // desired end velocity
};

struct ControlParams {
  double dt = 0.02;
  double yaw_kp = 1.0;
  double max_yaw_rate = 1.0;
  // The climb-rate channel drives a velocity loop with a finite time
  // constant; the setpoint is read this far beyond dt to compensate the lag.
  double climb_lookahead = 0.2;
};

// One 50 Hz closed-loop step: replan from the current state and emit the
// sampled acceleration / climb-rate setpoints one control period ahead.
// A synchronization failure degrades to a braking command.
inline Command control_step(const MavState& current, const ControlGoal& goal,
                            const AxisLimits& limits,
                            const ControlParams& params = {}) {
  Command cmd;
  cmd.yaw_rate = yaw_control(current.yaw, goal.pose.yaw, params.yaw_kp,
                             params.max_yaw_rate);
  try {
    const std::array<AxisState, 3> target = {
        AxisState{goal.pose.position.x, goal.velocity.x, 0.0},
        AxisState{goal.pose.position.y, goal.velocity.y, 0.0},
        AxisState{goal.pose.position.z, goal.velocity.z, 0.0}};
    const Trajectory3D traj = plan_to(current, target, limits);
    const auto s = traj.state_at(params.dt);
    cmd.ax = s[0].a;
    cmd.ay = s[1].a;
    cmd.climb_rate =
        traj.axes[2].state_at(params.dt + params.climb_lookahead).v;
  } catch (const SyncError&) {
    // Brake: drive every axis toward rest at the acceleration limit.
    const auto brake = [&](double v) {
      return -std::clamp(v / params.dt, -limits.a_max, limits.a_max);
    };
    cmd.ax = brake(current.x.v);
    cmd.ay = brake(current.y.v);
    const double dv = limits.a_max * params.dt;
    cmd.climb_rate = current.z.v - std::clamp(current.z.v, -dv, dv);
  }
  return cmd;
}

// --------------------------------------------------------------------------
// Trajectory dump (CSV, default 100 Hz)

inline void write_trajectory_csv(std::ostream& os, const Trajectory3D& traj,
                                 double sample_rate_hz = 100.0) {
  os << "t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz\n";
  const double dt = 1.0 / sample_rate_hz;
  const int n = static_cast<int>(std::ceil(traj.total_duration / dt));
  for (int i = 0; i <= n; ++i) {
    const double t = std::min(i * dt, traj.total_duration);
    const auto s = traj.state_at(t);
    os << t;
    for (int k = 0; k < 3; ++k) {
      os << ',' << s[k].p;
    }
    for (int k = 0; k < 3; ++k) {
      os << ',' << s[k].v;
    }
    for (int k = 0; k < 3; ++k) {
      os << ',' << s[k].a;
    }
    for (int k = 0; k < 3; ++k) {
      os << ',' << traj.axes[k].jerk_at(t);
    }
    os << '\n';
  }
}

}  // namespace mavnav
