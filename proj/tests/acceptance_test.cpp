// End-to-end acceptance runs: one test per criterion, each printing its own
// pass/fail line through the harness.

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mavnav/cli.hpp"
#include "mavnav/mission.hpp"
#include "mavnav/planner.hpp"
#include "mavnav/sensing.hpp"
#include "mavnav/simulator.hpp"
#include "mavnav/trajectory.hpp"
#include "support/axis_oracle.hpp"
#include "support/dijkstra_oracle.hpp"

using namespace mavnav;
namespace fs = std::filesystem;

namespace {

const std::string kSourceDir = MAVNAV_SOURCE_DIR;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

AxisState integrate(const AxisTrajectory& traj) {
  AxisState s = traj.start;
  for (const auto& ph : traj.phases) {
    s.advance(ph.duration, ph.jerk);
  }
  return s;
}

}  // namespace

TEST(Acceptance, Criterion01_AccelerationDistance) {
  const AxisLimits lim{7.8, 3.5, 4.0};
  const double distance = 7.8 * (7.8 / 3.5 + 3.5 / 4.0) / 2.0;
  const auto traj = plan_axis({0, 0, 0}, {distance, 7.8, 0.0}, lim);
  EXPECT_NEAR(integrate(traj).p, 12.10, 0.01);
  EXPECT_NEAR(traj.duration(), 3.104, 0.001);

  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) {
    const auto t = plan_axis({0, 0, 0}, {distance, 7.8, 0.0}, lim);
    ASSERT_FALSE(t.phases.empty());
  }
  const double per_plan_ms = seconds_since(t0);
  EXPECT_LT(per_plan_ms, 1.0) << "mean plan time [ms] over 1000 plans";
}

TEST(Acceptance, Criterion02_TimeOptimalityOracle) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    AxisLimits lim{0.5 + 9.5 * u01(rng), 0.5 + 7.5 * u01(rng),
                   0.5 + 15.5 * u01(rng)};
    const double v0 = lim.v_max * (2 * u01(rng) - 1);
    const double vt = lim.v_max * (2 * u01(rng) - 1);
    const double dp = 100.0 * (2 * u01(rng) - 1);
    const auto traj = plan_axis({0, v0, 0}, {dp, vt, 0}, lim);
    const double ref =
        oracle::min_duration(dp, v0, vt, lim.v_max, lim.a_max, lim.j_max);
    ASSERT_LE(traj.duration(), ref + 1e-3) << "instance " << i;
    const AxisState end = integrate(traj);
    ASSERT_NEAR(end.p, dp, 1e-4);
    ASSERT_NEAR(end.v, vt, 1e-4);
    ASSERT_NEAR(end.a, 0.0, 1e-4);
    const double T = traj.duration();
    for (int k = 0; k <= 1000; ++k) {
      const AxisState s = traj.state_at(T * k / 1000);
      ASSERT_LE(std::abs(s.v), lim.v_max + 1e-6);
      ASSERT_LE(std::abs(s.a), lim.a_max + 1e-6);
    }
  }
  EXPECT_LT(seconds_since(t0), 60.0);
}

TEST(Acceptance, Criterion03_PlannerOracle) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(99173);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double slope_bound = std::tan(deg2rad(15.0)) + 1e-9;
  int solved = 0;
  for (int i = 0; i < 100; ++i) {
    const GridMode mode =
        i % 2 == 0 ? GridMode::kIsotropic : GridMode::kVisibility;
    ScenarioWorld w;
    w.bounds = {{0, 0, 0},
                {20.0, 20.0,
                 mode == GridMode::kVisibility ? 20.0 * std::tan(deg2rad(15.0))
                                               : 20.0}};
    OccupancyGrid grid = rasterize(w, 1.0, mode);
    for (int z = 0; z < grid.nz(); ++z) {
      for (int y = 0; y < grid.ny(); ++y) {
        for (int x = 0; x < grid.nx(); ++x) {
          if (u01(rng) < 0.30) {
            grid.set_occupied({x, y, z});
          }
        }
      }
    }
    const auto free_cell = [&]() {
      std::uniform_int_distribution<int> dx(0, grid.nx() - 1);
      std::uniform_int_distribution<int> dy(0, grid.ny() - 1);
      std::uniform_int_distribution<int> dz(0, grid.nz() - 1);
      CellIndex c;
      do {
        c = {dx(rng), dy(rng), dz(rng)};
      } while (grid.occupied(c));
      return c;
    };
    const CellIndex s = free_cell();
    const CellIndex t = free_cell();
    const double penalty = 2.0 * grid.horizontal_resolution();
    const auto ref = oracle::dijkstra_cost(grid, s, t, mode, penalty);
    try {
      const auto path = plan(grid, grid.cell_center(s), grid.cell_center(t),
                             mode, {penalty});
      ASSERT_TRUE(ref.has_value()) << "instance " << i;
      ASSERT_EQ(path.cost, *ref) << "instance " << i;
      if (mode == GridMode::kVisibility) {
        for (std::size_t k = 0; k + 1 < path.waypoints.size(); ++k) {
          const Vec3 d = path.waypoints[k + 1] - path.waypoints[k];
          ASSERT_GT(d.horizontal_norm(), 0.0);
          ASSERT_LE(std::abs(d.z) / d.horizontal_norm(), slope_bound);
        }
      }
      ++solved;
    } catch (const UnreachableError&) {
      ASSERT_FALSE(ref.has_value()) << "instance " << i;
    }
  }
  EXPECT_GT(solved, 20);
  EXPECT_LT(seconds_since(t0), 30.0);
}

namespace {

struct HeadOnResult {
  double standoff = 0.0;
  double speed = 0.0;
};

HeadOnResult head_on_approach(double commanded_speed,
                              const AvoidanceParams& params) {
  ScenarioWorld w;
  w.bounds = {{0, 0, 0}, {40, 10, 5}};
  const double wall_x = 14.0;
  w.obstacles.push_back(
      Obstacle::make_box({{wall_x, 0, 0}, {wall_x + 1.0, 10, 5}}));
  const AxisLimits lim{commanded_speed, 3.5, 4.0};
  MavState st = MavState::at_rest({wall_x - 10.0, 5.0, 2.0});
  const Vec3 target{wall_x, 5.0, 2.0};
  Vec3 carrot = target;
  Command cmd;
  const double dt = 0.005;
  int step_idx = 0;
  for (double t = 0.0; t < 40.0; t += dt, ++step_idx) {
    if (step_idx % 20 == 0) {
      carrot = avoidance_tick(st.position(), target, w, t, params)
                   .adjusted_target;
    }
    if (step_idx % 4 == 0) {
      ControlGoal goal;
      goal.pose = Pose4::make(carrot, 0.0);
      cmd = control_step(st, goal, lim);
    }
    const auto axis = [dt](AxisState& s, double a) {
      s.p += s.v * dt + 0.5 * a * dt * dt;
      s.v += a * dt;
      s.a = a;
    };
    axis(st.x, cmd.ax);
    axis(st.y, cmd.ay);
  }
  return {wall_x - st.x.p, st.velocity().norm()};
}

}  // namespace

TEST(Acceptance, Criterion04_AvoidanceLaw) {
  const AvoidanceParams params{1.85, 2.85, 1.0};
  // Scale-factor anchors and clipping.
  EXPECT_DOUBLE_EQ(scale_factors(params.d_passive, params).reduce, 0.0);
  EXPECT_DOUBLE_EQ(scale_factors(params.d_passive, params).push, 0.0);
  EXPECT_DOUBLE_EQ(scale_factors(params.d_active, params).reduce, 1.0);
  EXPECT_DOUBLE_EQ(scale_factors(params.d_active, params).push, 0.0);
  for (double d = 0.0; d < 5.0; d += 0.01) {
    const auto s = scale_factors(d, params);
    ASSERT_GE(s.reduce, 0.0);
    ASSERT_LE(s.reduce, 1.0);
    ASSERT_GE(s.push, 0.0);
    ASSERT_LE(s.push, 1.0);
  }
  // Head-on closed loop: a stable standoff inside the passive sphere for
  // every commanded speed.
  for (const double v : {0.5, 1.0, 2.0, 5.0}) {
    const auto out = head_on_approach(v, params);
    EXPECT_LT(out.speed, 0.02) << "commanded " << v;
    EXPECT_GT(out.standoff, 0.0) << "commanded " << v;
    EXPECT_LT(out.standoff, params.d_passive) << "commanded " << v;
  }
}

TEST(Acceptance, Criterion04_PersonApproachClearance) {
  // Hovering vehicle, person walking straight at it with 0.8 m/s. A jerk
  // bound of 4 m/s^3 concedes ~0.45 m of gap before the hover matches the
  // intruder's speed, so the measured floor sits near 1.1 m; the required
  // floor is d_active - 0.2 m. The requirement stands as stated; the
  // head-on and blocked-waypoint cases pin the passing behaviors.
  const AvoidanceParams params{1.85, 2.85, 1.0};
  ScenarioWorld w;
  w.bounds = {{0, 0, 0}, {40, 10, 5}};
  Obstacle person = Obstacle::make_sphere({0, 0, 0}, 0.3);
  person.kind = ObstacleKind::kDynamic;
  person.schedule = {{0.0, {22.0, 5.0, 1.7}}, {17.5, {8.0, 5.0, 1.7}}};
  w.obstacles.push_back(person);
  const AxisLimits lim{2.1, 3.5, 4.0};
  MavState st = MavState::at_rest({8.0, 5.0, 1.7});
  const Vec3 hover = st.position();
  Vec3 carrot = hover;
  Command cmd;
  const double dt = 0.005;
  double min_surface = std::numeric_limits<double>::infinity();
  int step_idx = 0;
  for (double t = 0.0; t < 22.0; t += dt, ++step_idx) {
    if (step_idx % 20 == 0) {
      carrot =
          avoidance_tick(st.position(), hover, w, t, params).adjusted_target;
    }
    if (step_idx % 4 == 0) {
      ControlGoal goal;
      goal.pose = Pose4::make(carrot, 0.0);
      cmd = control_step(st, goal, lim);
    }
    const auto axis = [dt](AxisState& s, double a) {
      s.p += s.v * dt + 0.5 * a * dt * dt;
      s.v += a * dt;
      s.a = a;
    };
    axis(st.x, cmd.ax);
    axis(st.y, cmd.ay);
    min_surface = std::min(
        min_surface, nearest_obstacle(st.position(), w.all_solids(), t)
                         ->distance);
  }
  EXPECT_LT(st.x.p, 8.0 - 0.5) << "vehicle must be displaced away";
  EXPECT_GE(min_surface, params.d_active - 0.2)
      << "measured reactive floor of the law";
}

TEST(Acceptance, Criterion04_BlockedWaypointStandoff) {
  const AvoidanceParams params{1.85, 2.85, 1.0};
  ScenarioWorld w;
  w.bounds = {{0, 0, 0}, {40, 10, 5}};
  w.obstacles.push_back(Obstacle::make_sphere({14.0, 5.0, 1.7}, 0.3));
  const AxisLimits lim{2.1, 3.5, 4.0};
  MavState st = MavState::at_rest({6.0, 5.0, 1.7});
  const Vec3 waypoint{20.0, 5.0, 1.7};
  Vec3 carrot = waypoint;
  Command cmd;
  const double dt = 0.005;
  int step_idx = 0;
  for (double t = 0.0; t < 30.0; t += dt, ++step_idx) {
    if (step_idx % 20 == 0) {
      carrot = avoidance_tick(st.position(), waypoint, w, t, params)
                   .adjusted_target;
    }
    if (step_idx % 4 == 0) {
      ControlGoal goal;
      goal.pose = Pose4::make(carrot, 0.0);
      cmd = control_step(st, goal, lim);
    }
    const auto axis = [dt](AxisState& s, double a) {
      s.p += s.v * dt + 0.5 * a * dt * dt;
      s.v += a * dt;
      s.a = a;
    };
    axis(st.x, cmd.ax);
    axis(st.y, cmd.ay);
  }
  const auto hit = nearest_obstacle(st.position(), w.all_solids(), 30.0);
  EXPECT_LT(st.velocity().norm(), 0.02);
  EXPECT_GE(hit->distance, params.d_active - 0.2);
  EXPECT_LE(hit->distance, params.d_passive);
}

TEST(Acceptance, Criterion05_WarehouseMission) {
  const auto wall0 = std::chrono::steady_clock::now();
  const ScenarioWorld world =
      load_scenario(kSourceDir + "/scenarios/warehouse.json");
  const auto mission = cli_detail::prepare_mission(
      world, kSourceDir + "/missions/warehouse_inventory.json");
  cli_detail::RunFlags flags;
  SimConfig cfg =
      cli_detail::make_config(world, flags, mission.request.velocity_cap);
  EXPECT_NEAR(cfg.limits.v_max, 2.1, 1e-12);
  Simulator sim(world, cfg);
  const RunResult r = sim.run_mission(mission.merged_poses);

  EXPECT_TRUE(r.metrics.completed);
  EXPECT_EQ(r.metrics.poses_reached, r.metrics.poses_total);
  const auto devs = pose_deviations(r.trace, mission.full_poses);
  double mean = 0.0;
  for (const double d : devs) {
    mean += d;
  }
  mean /= static_cast<double>(devs.size());
  EXPECT_LE(mean, 0.10) << "mean deviation over " << devs.size()
                        << " view poses";
  EXPECT_GE(r.metrics.peak_speed, 2.0);
  EXPECT_LE(r.metrics.peak_speed, 2.12);
  EXPECT_GE(r.metrics.min_clearance, world.mav_radius) << "zero collisions";
  EXPECT_LT(r.metrics.duration, 600.0);
  EXPECT_LT(seconds_since(wall0), 60.0);
}

TEST(Acceptance, Criterion06_CourtyardGusts) {
  const ScenarioWorld world =
      load_scenario(kSourceDir + "/scenarios/courtyard.json");
  ASSERT_TRUE(world.disturbance.enabled);
  ASSERT_NEAR(world.disturbance.cap, 1.5, 1e-12);
  SimConfig cfg;
  cfg.apply_scenario_defaults(world);
  cfg.start = *world.start;
  cfg.timeout = 300.0;
  Simulator sim(world, cfg);
  const auto poses = cli_detail::courtyard_poses(world, 11);
  const RunResult r = sim.run_mission(poses);
  EXPECT_EQ(r.metrics.poses_reached, 11);
  EXPECT_GE(r.metrics.peak_speed, 7.5);
  EXPECT_LE(r.metrics.max_straight_line_deviation, 0.49);
  EXPECT_LE(r.metrics.max_overshoot, 1.2);
  // The gusts have to actually bite for the bounds to mean anything.
  EXPECT_GE(r.metrics.max_straight_line_deviation, 0.02);
}

TEST(Acceptance, Criterion07_SensingNumbersAndStatistics) {
  EXPECT_DOUBLE_EQ(max_detectable_velocity(0.004, 0.02), 10.0);

  // Two synthetic flights at the configured noise.
  std::mt19937_64 rng(20180606);
  std::normal_distribution<double> gauss(0.0, 0.04);
  std::vector<std::vector<Detection>> flights(2);
  for (int f = 0; f < 2; ++f) {
    for (int id : {5, 9}) {
      for (int i = 0; i < 30; ++i) {
        Detection d;
        d.tag_id = id;
        d.position = Vec3{1.0 * id, 2.0, 1.0} +
                     Vec3{gauss(rng), gauss(rng), gauss(rng)};
        flights[f].push_back(d);
      }
    }
  }
  const auto stats = detection_statistics(flights);
  for (const auto& s : stats) {
    for (const auto& tf : s.per_flight) {
      ASSERT_GE(tf.count, 20);
      ASSERT_TRUE(tf.sigma_cm.has_value());
      EXPECT_GE(*tf.sigma_cm, 3.0);
      EXPECT_LE(*tf.sigma_cm, 5.0);
    }
  }
  std::ostringstream os;
  write_detection_stats_csv(os, stats, 2);
  std::string header;
  std::istringstream is(os.str());
  std::getline(is, header);
  EXPECT_EQ(header, "tag_id,n1,n2,sigma1_cm,sigma2_cm,mu1_2_cm");

  // Zero false positives over the warehouse corpus: every camera detection
  // re-verified against an enabled facing tag in range of the vehicle at
  // that instant.
  const ScenarioWorld world =
      load_scenario(kSourceDir + "/scenarios/warehouse.json");
  const auto mission = cli_detail::prepare_mission(
      world, kSourceDir + "/missions/warehouse_inventory.json");
  cli_detail::RunFlags flags;
  SimConfig cfg =
      cli_detail::make_config(world, flags, mission.request.velocity_cap);
  Simulator sim(world, cfg);
  const RunResult r = sim.run_mission(mission.merged_poses);
  ASSERT_FALSE(r.detections.empty());
  int visual_count = 0;
  for (const auto& det : r.detections) {
    const Tag* tag = nullptr;
    for (const auto& t : world.tags) {
      if (t.id == det.tag_id) {
        tag = &t;
      }
    }
    ASSERT_NE(tag, nullptr) << "detection of a tag that does not exist";
    ASSERT_FALSE(tag->disabled) << "detection of a disabled tag";
    // Vehicle state at the detection instant.
    const auto it = std::lower_bound(r.trace.times.begin(),
                                     r.trace.times.end(), det.time - 1e-9);
    ASSERT_NE(it, r.trace.times.end());
    const MavState& at =
        r.trace.states[static_cast<std::size_t>(it - r.trace.times.begin())];
    const Vec3 rel = tag->position - at.position();
    if (det.sensor == Sensor::kRfid) {
      ASSERT_LE(rel.norm(), cfg.rfid_range + 0.05);
      continue;
    }
    ++visual_count;
    ASSERT_LE(rel.norm(), cfg.camera.max_range + 1e-9);
    ASSERT_LT(tag->normal.dot(rel.normalized()), 0.0) << "back side";
    const double speed =
        (at.velocity() + Vec3{0, 0, at.yaw_rate}.cross(rel)).norm();
    ASSERT_LE(speed,
              max_detectable_velocity(cfg.camera.exposure, tag->edge / 8.0) +
                  1e-9);
    // Brute-force angle check against either camera axis.
    bool in_some_frustum = false;
    for (const double mount : cfg.camera.mount_yaw) {
      const double cam_yaw = wrap_angle(at.yaw + mount);
      const Vec3 axis{std::cos(cam_yaw), std::sin(cam_yaw), 0};
      const Vec3 planar{rel.x, rel.y, 0};
      const double forward = planar.dot(axis);
      if (forward <= 0) {
        continue;
      }
      const double az = std::acos(
          std::clamp(forward / planar.norm(), -1.0, 1.0));
      const double el = std::atan2(std::abs(rel.z), planar.norm());
      in_some_frustum |= az <= deg2rad(cfg.camera.h_apex_deg / 2.0) &&
                         el <= deg2rad(cfg.camera.v_apex_deg / 2.0);
    }
    ASSERT_TRUE(in_some_frustum);
  }
  EXPECT_GT(visual_count, 20);
}

TEST(Acceptance, Criterion08_IcpRecovery) {
  std::mt19937_64 rng(314159);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::vector<Vec3> model;
  for (int i = 0; i < 200; ++i) {
    model.push_back({u(rng), u(rng), 0.4 * u(rng)});
  }
  const RigidTransform truth =
      RigidTransform::rotation_z(deg2rad(12.0), {1.4, -0.8, 0.3});
  std::vector<Vec3> map;
  for (const auto& p : model) {
    map.push_back(truth.apply(p));
  }
  const RigidTransform initial =
      RigidTransform::rotation_z(deg2rad(9.0), {1.1, -0.5, 0.1});
  const auto res = icp_align(model, map, initial);
  for (std::size_t i = 1; i < res.rms_history.size(); ++i) {
    ASSERT_LE(res.rms_history[i], res.rms_history[i - 1] + 1e-12)
        << "RMS must never increase";
  }
  // Exact-correspondence recovery to 1e-6.
  for (const auto& p : model) {
    ASSERT_LE((res.transform.apply(p) - truth.apply(p)).norm(), 1e-6);
  }
}

TEST(Acceptance, Criterion09_DeterministicRuns) {
  const std::string out_a = ::testing::TempDir() + "/acc_det_a";
  const std::string out_b = ::testing::TempDir() + "/acc_det_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  for (const auto& out : {out_a, out_b}) {
    ASSERT_EQ(run_cli({"run", "--scenario",
                       kSourceDir + "/scenarios/warehouse.json", "--mission",
                       kSourceDir + "/missions/warehouse_inventory.json",
                       "--seed", "2024", "--out", out}),
              kExitOk);
  }
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string a = slurp(out_a + "/trace.csv");
  ASSERT_FALSE(a.empty());
  EXPECT_TRUE(a == slurp(out_b + "/trace.csv"));
}

TEST(Acceptance, Criterion10_RdpDeviationBound) {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    PlannedPath path;
    const int n = 3 + static_cast<int>(u01(rng) * 80);
    Vec3 cur{0, 0, 0};
    for (int k = 0; k < n; ++k) {
      cur += Vec3{u01(rng) - 0.5, u01(rng) - 0.5, 0.4 * (u01(rng) - 0.5)};
      path.waypoints.push_back(cur);
    }
    const double eps = 0.01 + 0.6 * u01(rng);
    const auto simplified = simplify(path, eps);
    for (const auto& p : path.waypoints) {
      double best = std::numeric_limits<double>::infinity();
      if (simplified.waypoints.size() == 1) {
        best = (p - simplified.waypoints[0]).norm();
      }
      for (std::size_t k = 0; k + 1 < simplified.waypoints.size(); ++k) {
        best = std::min(best,
                        point_segment_distance(p, simplified.waypoints[k],
                                               simplified.waypoints[k + 1]));
      }
      ASSERT_LE(best, eps + 1e-12) << "instance " << i;
    }
  }
}
