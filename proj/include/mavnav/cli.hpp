#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mavnav/errors.hpp"
#include "mavnav/mission.hpp"
#include "mavnav/plot.hpp"
#include "mavnav/simulator.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

enum ExitCode {
  kExitOk = 0,
  kExitInputError = 1,
  kExitPartial = 2,
  kExitThreshold = 3,
};

namespace cli_detail {

inline std::uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("manifest: cannot hash missing file " + path);
  }
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline nlohmann::json vec_json(const Vec3& v) {
  return nlohmann::json::array({v.x, v.y, v.z});
}

inline void write_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path);
  out << std::setprecision(17);
  out << "t,px,py,pz,vx,vy,vz,ax,ay,az,jx,jy,jz,yaw\n";
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    const MavState& s = trace.states[k];
    Vec3 jerk;
    if (k + 1 < trace.states.size()) {
      const double dt = trace.times[k + 1] - trace.times[k];
      if (dt > 0.0) {
        jerk = (trace.states[k + 1].acceleration() - s.acceleration()) / dt;
      }
    }
    out << trace.times[k] << ',' << s.x.p << ',' << s.y.p << ',' << s.z.p
        << ',' << s.x.v << ',' << s.y.v << ',' << s.z.v << ',' << s.x.a << ','
        << s.y.a << ',' << s.z.a << ',' << jerk.x << ',' << jerk.y << ','
        << jerk.z << ',' << s.yaw << '\n';
  }
}

inline void write_events_jsonl(const std::string& path,
                               const SimTrace& trace) {
  std::ofstream out(path);
  for (const auto& ev : trace.events) {
    nlohmann::json j = {{"t", ev.t},
                        {"type", ev.type},
                        {"index", ev.index},
                        {"position", vec_json(ev.position)}};
    out << j.dump() << '\n';
  }
}

inline void write_detections_jsonl(const std::string& path,
                                   const std::vector<Detection>& dets) {
  std::ofstream out(path);
  for (const auto& d : dets) {
    const char* sensor = d.sensor == Sensor::kRfid
                             ? "rfid"
                             : (d.sensor == Sensor::kCamera0 ? "camera0"
                                                             : "camera1");
    nlohmann::json j = {{"t", d.time},
                        {"sensor", sensor},
                        {"tag", d.tag_id},
                        {"position", vec_json(d.position)},
                        {"strength", d.strength}};
    out << j.dump() << '\n';
  }
}

inline void write_avoidance_jsonl(const std::string& path,
                                  const std::vector<AvoidanceLogEntry>& log) {
  std::ofstream out(path);
  for (const auto& e : log) {
    nlohmann::json obstacles = nlohmann::json::array();
    for (const auto& o : e.detail.per_obstacle) {
      obstacles.push_back({{"d", o.distance},
                           {"s_reduce", o.factors.reduce},
                           {"s_push", o.factors.push},
                           {"direction", vec_json(o.direction)}});
    }
    nlohmann::json j = {{"t", e.t},
                        {"active", e.detail.active},
                        {"mav", vec_json(e.adjusted_target - e.detail.target)},
                        {"original", vec_json(e.original_target)},
                        {"adjusted", vec_json(e.adjusted_target)},
                        {"obstacles", obstacles}};
    out << j.dump() << '\n';
  }
}

inline Vec3 vec_from_json(const nlohmann::json& j) {
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::vector<AvoidanceLogEntry> read_avoidance_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open avoidance log: " + path);
  }
  std::vector<AvoidanceLogEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto j = nlohmann::json::parse(line);
    AvoidanceLogEntry e;
    e.t = j.at("t").get<double>();
    e.original_target = vec_from_json(j.at("original"));
    e.adjusted_target = vec_from_json(j.at("adjusted"));
    e.detail.active = j.at("active").get<bool>();
    e.detail.target = e.adjusted_target - vec_from_json(j.at("mav"));
    for (const auto& o : j.at("obstacles")) {
      ObstacleDiag diag;
      diag.distance = o.at("d").get<double>();
      diag.direction = vec_from_json(o.at("direction"));
      diag.factors.reduce = o.at("s_reduce").get<double>();
      diag.factors.push = o.at("s_push").get<double>();
      e.detail.per_obstacle.push_back(diag);
    }
    out.push_back(e);
  }
  return out;
}

inline nlohmann::json metrics_json(const Metrics& m) {
  return {{"mean_arrival_deviation_m", m.mean_arrival_deviation},
          {"arrival_deviation_m", m.arrival_deviation},
          {"max_straight_line_deviation_m", m.max_straight_line_deviation},
          {"max_overshoot_m", m.max_overshoot},
          {"peak_speed_mps", m.peak_speed},
          {"min_clearance_m",
           std::isfinite(m.min_clearance) ? m.min_clearance : -1.0},
          {"duration_s", m.duration},
          {"poses_total", m.poses_total},
          {"poses_reached", m.poses_reached},
          {"completed", m.completed}};
}

struct RunArtifacts {
  std::vector<std::string> files;

  void write(const std::string& dir, const std::string& name,
             const std::function<void(const std::string&)>& writer) {
    const std::string path = dir + "/" + name;
    writer(path);
    files.push_back(name);
  }
};

inline void write_manifest(const std::string& dir,
                           const RunArtifacts& artifacts,
                           const nlohmann::json& header) {
  nlohmann::json j = header;
  j["format"] = 1;
  auto& arr = j["artifacts"] = nlohmann::json::array();
  for (const auto& name : artifacts.files) {
    arr.push_back({{"file", name},
                   {"fnv1a64", hex64(fnv1a64_file(dir + "/" + name))}});
  }
  std::ofstream out(dir + "/manifest.json");
  out << j.dump(2) << '\n';
}

struct LoadedMission {
  MissionRequest request;
  std::vector<ViewPose> full_poses;    // one per storage unit
  std::vector<ViewPose> merged_poses;  // as commanded
};

inline LoadedMission prepare_mission(const ScenarioWorld& world,
                                     const std::string& mission_path,
                                     double standoff = 1.5,
                                     double merge_tol = 0.05) {
  LoadedMission m;
  m.request = load_mission(mission_path, world.shelves);
  m.full_poses = generate_coverage(world.shelves, m.request, standoff);
  m.merged_poses = merge_collinear(m.full_poses, merge_tol);
  return m;
}

struct RunFlags {
  std::string scenario_path;
  std::string mission_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> vmax;
  std::optional<double> noise_sigma;
  bool visibility_constrained = false;
};

inline SimConfig make_config(const ScenarioWorld& world,
                             const RunFlags& flags,
                             const std::optional<double>& mission_cap) {
  SimConfig cfg;
  cfg.apply_scenario_defaults(world);
  if (flags.seed) {
    cfg.seed = *flags.seed;
  }
  if (flags.vmax) {
    cfg.limits.v_max = std::min(cfg.limits.v_max, *flags.vmax);
  }
  if (mission_cap) {
    cfg.limits.v_max = std::min(cfg.limits.v_max, *mission_cap);
  }
  if (flags.noise_sigma) {
    cfg.localization_sigma = *flags.noise_sigma;
  }
  cfg.grid_mode = flags.visibility_constrained ? GridMode::kVisibility
                                               : GridMode::kIsotropic;
  if (!world.start) {
    throw ParseError("scenario: missing 'start' pose required for a run");
  }
  cfg.start = *world.start;
  return cfg;
}

inline void write_run_outputs(const std::string& out_dir,
                              const ScenarioWorld& world,
                              const LoadedMission& mission,
                              const RunResult& result,
                              const SimConfig& cfg,
                              const nlohmann::json& manifest_header) {
  std::filesystem::create_directories(out_dir);
  RunArtifacts artifacts;
  artifacts.write(out_dir, "trace.csv", [&](const std::string& p) {
    write_trace_csv(p, result.trace);
  });
  artifacts.write(out_dir, "events.jsonl", [&](const std::string& p) {
    write_events_jsonl(p, result.trace);
  });
  artifacts.write(out_dir, "detections.jsonl", [&](const std::string& p) {
    write_detections_jsonl(p, result.detections);
  });
  artifacts.write(out_dir, "avoidance.jsonl", [&](const std::string& p) {
    write_avoidance_jsonl(p, result.avoidance_log);
  });
  artifacts.write(out_dir, "metrics.json", [&](const std::string& p) {
    std::ofstream out(p);
    nlohmann::json j = metrics_json(result.metrics);
    const auto devs = pose_deviations(result.trace, mission.full_poses);
    j["unit_pose_deviation_m"] = devs;
    out << j.dump(2) << '\n';
  });
  artifacts.write(out_dir, "mission_plan.json", [&](const std::string& p) {
    std::ofstream out(p);
    out << mission_plan_to_json(mission.merged_poses).dump(2) << '\n';
  });
  std::filesystem::create_directories(out_dir + "/paths");
  for (std::size_t i = 0; i < result.planned_paths.size(); ++i) {
    std::ostringstream name;
    name << "paths/plan_" << std::setw(3) << std::setfill('0') << i << ".csv";
    artifacts.write(out_dir, name.str(), [&](const std::string& p) {
      std::ofstream out(p);
      write_path_csv(out, result.planned_paths[i].path);
    });
  }
  artifacts.write(out_dir, "plan_stats.jsonl", [&](const std::string& p) {
    std::ofstream out(p);
    for (const auto& rec : result.planned_paths) {
      nlohmann::json j = {{"t", rec.t},
                          {"pose_index", rec.pose_index},
                          {"cost", rec.path.cost},
                          {"expanded", rec.path.stats.expanded},
                          {"duration_s", rec.path.stats.seconds}};
      out << j.dump() << '\n';
    }
  });
  artifacts.write(out_dir, "results.json", [&](const std::string& p) {
    // WMS-facing summary: per requested unit, the closest pass and the
    // per-tag detection counts.
    const auto devs = pose_deviations(result.trace, mission.full_poses);
    nlohmann::json units = nlohmann::json::array();
    for (std::size_t i = 0; i < mission.full_poses.size(); ++i) {
      units.push_back({{"unit", mission.full_poses[i].unit_id},
                       {"deviation_m", devs[i]}});
    }
    std::map<int, int> tag_counts;
    for (const auto& d : result.detections) {
      tag_counts[d.tag_id]++;
    }
    nlohmann::json tags = nlohmann::json::object();
    for (const auto& [id, n] : tag_counts) {
      tags[std::to_string(id)] = n;
    }
    nlohmann::json j = {{"completed", result.metrics.completed},
                        {"poses_reached", result.metrics.poses_reached},
                        {"poses_total", result.metrics.poses_total},
                        {"units", units},
                        {"tag_detections", tags}};
    std::ofstream out(p);
    out << j.dump(2) << '\n';
  });
  artifacts.write(out_dir, "top.svg", [&](const std::string& p) {
    PlotInputs in;
    in.world = &world;
    in.trace = &result.trace;
    in.poses = &mission.full_poses;
    in.avoidance = &result.avoidance_log;
    in.v_max = cfg.limits.v_max;
    emit_view(in, 0, 1, p);
  });
  artifacts.write(out_dir, "side.svg", [&](const std::string& p) {
    PlotInputs in;
    in.world = &world;
    in.trace = &result.trace;
    in.poses = &mission.full_poses;
    in.v_max = cfg.limits.v_max;
    emit_view(in, 0, 2, p);
  });
  write_manifest(out_dir, artifacts, manifest_header);
}

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_run(const RunFlags& flags) {
  ScenarioWorld world;
  LoadedMission mission;
  try {
    world = load_scenario(flags.scenario_path);
    mission = prepare_mission(world, flags.mission_path);
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  SimConfig cfg;
  try {
    cfg = make_config(world, flags, mission.request.velocity_cap);
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  Simulator sim(world, cfg);
  const RunResult result = sim.run_mission(mission.merged_poses);

  nlohmann::json header = {
      {"scenario", flags.scenario_path},
      {"mission", flags.mission_path},
      {"seed", cfg.seed},
      {"v_max", cfg.limits.v_max},
      {"localization_sigma", cfg.localization_sigma},
      {"visibility_constrained", cfg.grid_mode == GridMode::kVisibility},
      {"out", flags.out_dir}};
  write_run_outputs(flags.out_dir, world, mission, result, cfg, header);

  std::cout << "mission " << (result.metrics.completed ? "completed"
                                                       : "incomplete")
            << ": " << result.metrics.poses_reached << "/"
            << result.metrics.poses_total << " poses, mean deviation "
            << result.metrics.mean_arrival_deviation << " m, peak speed "
            << result.metrics.peak_speed << " m/s\n";
  return result.metrics.completed ? kExitOk : kExitPartial;
}

struct SuiteCheck {
  std::string name;
  double value;
  std::string requirement;
  bool pass;
};

inline void print_suite_table(const std::string& title,
                              const std::vector<SuiteCheck>& checks) {
  std::cout << "== " << title << "\n";
  for (const auto& c : checks) {
    std::cout << (c.pass ? "  [PASS] " : "  [FAIL] ") << std::left
              << std::setw(34) << c.name << " " << std::setw(10) << c.value
              << " (" << c.requirement << ")\n";
  }
}

inline int finish_suite(const std::string& title,
                        const std::vector<SuiteCheck>& checks) {
  print_suite_table(title, checks);
  for (const auto& c : checks) {
    if (!c.pass) {
      std::cerr << "threshold violated: " << c.name << "\n";
      return kExitThreshold;
    }
  }
  return kExitOk;
}

inline std::vector<ViewPose> courtyard_poses(const ScenarioWorld& world,
                                             int alternations = 11) {
  // Fast alternating line flights between two waypoints 25 m apart.
  const Vec3 a = world.start ? world.start->position : Vec3{5.0, 10.0, 2.0};
  const Vec3 b = a + Vec3{25.0, 0.0, 0.0};
  std::vector<ViewPose> poses;
  for (int i = 0; i < alternations; ++i) {
    ViewPose vp;
    vp.pose = Pose4::make(i % 2 == 0 ? b : a, 0.0);
    poses.push_back(vp);
  }
  return poses;
}

inline int cmd_suite(const std::string& experiment,
                           const std::string& scenario_dir,
                           const std::string& out_dir,
                           std::optional<std::uint64_t> seed) {
  std::filesystem::create_directories(out_dir);
  try {
    if (experiment == "courtyard") {
      ScenarioWorld world = load_scenario(scenario_dir + "/courtyard.json");
      SimConfig cfg;
      cfg.apply_scenario_defaults(world);
      if (seed) {
        cfg.seed = *seed;
      }
      cfg.start = *world.start;
      cfg.timeout = 300.0;
      Simulator sim(world, cfg);
      const auto poses = courtyard_poses(world);
      const RunResult r = sim.run_mission(poses);
      cli_detail::write_trace_csv(out_dir + "/courtyard_trace.csv", r.trace);
      const std::vector<SuiteCheck> checks = {
          {"peak speed [m/s]", r.metrics.peak_speed, ">= 7.5",
           r.metrics.peak_speed >= 7.5},
          {"straight-line deviation [m]",
           r.metrics.max_straight_line_deviation, "<= 0.49",
           r.metrics.max_straight_line_deviation <= 0.49},
          {"overshoot [m]", r.metrics.max_overshoot, "<= 1.2",
           r.metrics.max_overshoot <= 1.2},
          {"poses reached", static_cast<double>(r.metrics.poses_reached),
           "== 11", r.metrics.poses_reached == 11}};
      return finish_suite("courtyard", checks);
    }
    if (experiment == "figure-eight") {
      ScenarioWorld world = load_scenario(scenario_dir + "/garage.json");
      SimConfig cfg;
      cfg.apply_scenario_defaults(world);
      if (seed) {
        cfg.seed = *seed;
      }
      cfg.start = world.start.value_or(Pose4::make({10, 10, 1.5}, 0.0));
      cfg.localization_rate = 10.0;
      Simulator sim(world, cfg);
      Simulator::FigureEightParams params;
      params.center = {0.5 * (world.bounds.lo.x + world.bounds.hi.x),
                       0.5 * (world.bounds.lo.y + world.bounds.hi.y), 0.0};
      params.z = cfg.start.position.z;
      params.laps = 4;
      const auto r = sim.figure_eight(params);
      cli_detail::write_trace_csv(out_dir + "/figure_eight_trace.csv",
                                  r.run.trace);
      const std::vector<SuiteCheck> checks = {
          {"peak speed [m/s]", r.run.metrics.peak_speed, ">= 1.7",
           r.run.metrics.peak_speed >= 1.7},
          {"lap spread [m]", r.lap_spread, "<= 0.3", r.lap_spread <= 0.3},
          {"min clearance [m]", r.run.metrics.min_clearance, "> 0.85",
           r.run.metrics.min_clearance > 0.85}};
      return finish_suite("figure-eight", checks);
    }
    if (experiment == "warehouse") {
      ScenarioWorld world = load_scenario(scenario_dir + "/warehouse.json");
      RunFlags flags;
      flags.out_dir = out_dir;
      LoadedMission mission = prepare_mission(
          world, scenario_dir + "/../missions/warehouse_inventory.json");
      std::vector<std::vector<Detection>> flights;
      std::vector<SuiteCheck> checks;
      double sim_time = 0.0;
      for (int flight = 0; flight < 2; ++flight) {
        SimConfig cfg = make_config(world, flags,
                                    mission.request.velocity_cap);
        cfg.localization_rate = 10.0;
        if (seed) {
          cfg.seed = *seed;
        }
        cfg.seed += static_cast<std::uint64_t>(flight);
        Simulator sim(world, cfg);
        const RunResult r = sim.run_mission(mission.merged_poses);
        if (flight == 0) {
          nlohmann::json header = {{"scenario", "warehouse"},
                                   {"seed", cfg.seed}};
          write_run_outputs(out_dir, world, mission, r, cfg, header);
        }
        flights.push_back(r.detections);
        sim_time = std::max(sim_time, r.metrics.duration);
        const auto devs = pose_deviations(r.trace, mission.full_poses);
        double mean = 0.0;
        for (const double d : devs) {
          mean += d;
        }
        mean /= static_cast<double>(devs.size());
        const std::string tag = "flight " + std::to_string(flight + 1);
        checks.push_back({tag + " all poses reached",
                          static_cast<double>(r.metrics.poses_reached),
                          "== all", r.metrics.completed});
        checks.push_back(
            {tag + " mean deviation [m]", mean, "<= 0.10", mean <= 0.10});
        checks.push_back({tag + " peak speed [m/s]", r.metrics.peak_speed,
                          "in [2.0, 2.12]",
                          r.metrics.peak_speed >= 2.0 &&
                              r.metrics.peak_speed <= 2.12});
        checks.push_back({tag + " min clearance [m]",
                          r.metrics.min_clearance, ">= 0.85 (no collision)",
                          r.metrics.min_clearance >= 0.85});
      }
      checks.push_back(
          {"simulated time [s]", sim_time, "< 600", sim_time < 600.0});
      // Per-tag detection statistics across the two flights.
      std::vector<std::vector<Detection>> visual(2);
      for (int f = 0; f < 2; ++f) {
        for (const auto& d : flights[f]) {
          if (d.sensor != Sensor::kRfid) {
            visual[f].push_back(d);
          }
        }
      }
      const auto stats = detection_statistics(visual);
      {
        std::ofstream out(out_dir + "/detection_stats.csv");
        write_detection_stats_csv(out, stats, 2);
      }
      write_detection_stats_csv(std::cout, stats, 2);
      return finish_suite("warehouse", checks);
    }
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  std::cerr << "unknown experiment (courtyard|figure-eight|warehouse)\n";
  return kExitInputError;
}

inline SimTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open trace: " + path);
  }
  SimTrace trace;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream is(line);
    std::vector<double> v;
    std::string cell;
    while (std::getline(is, cell, ',')) {
      v.push_back(std::stod(cell));
    }
    if (v.size() < 14) {
      throw ParseError("trace: malformed row in " + path);
    }
    MavState s;
    s.t = v[0];
    s.x = {v[1], v[4], v[7]};
    s.y = {v[2], v[5], v[8]};
    s.z = {v[3], v[6], v[9]};
    s.yaw = v[13];
    trace.times.push_back(v[0]);
    trace.states.push_back(s);
  }
  return trace;
}

inline int cmd_plot(const std::string& scenario_path,
                    const std::string& trace_path,
                    const std::string& avoidance_path,
                    const std::string& out_dir) {
  try {
    const ScenarioWorld world = load_scenario(scenario_path);
    SimTrace trace;
    if (!trace_path.empty()) {
      trace = read_trace_csv(trace_path);
    }
    std::vector<AvoidanceLogEntry> avoidance;
    if (!avoidance_path.empty()) {
      avoidance = read_avoidance_jsonl(avoidance_path);
    }
    std::filesystem::create_directories(out_dir);
    PlotInputs in;
    in.world = &world;
    in.trace = trace.states.empty() ? nullptr : &trace;
    in.avoidance = avoidance.empty() ? nullptr : &avoidance;
    in.v_max = world.limits.v_max;
    emit_plots(in, out_dir);
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  std::cout << "wrote " << out_dir << "/top.svg and side.svg\n";
  return kExitOk;
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"warehouse inventory MAV navigation simulator"};
  app.require_subcommand(1);

  cli_detail::RunFlags flags;
  std::uint64_t seed_value = 0;
  double vmax_value = 0.0;
  double noise_value = 0.0;

  auto* run = app.add_subcommand("run", "execute a scenario + mission");
  run->add_option("--scenario", flags.scenario_path, "scenario JSON")
      ->required();
  run->add_option("--mission", flags.mission_path, "mission JSON")
      ->required();
  run->add_option("--out", flags.out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed_value, "override RNG seed");
  auto* vmax_opt = run->add_option("--vmax", vmax_value, "cap v_max [m/s]");
  auto* noise_opt = run->add_option("--noise-sigma", noise_value,
                                    "localization noise sigma [m]");
  run->add_flag("--visibility-constrained", flags.visibility_constrained,
                "plan within the lidar's vertical field of view");

  std::string experiment;
  std::string scenario_dir = "scenarios";
  std::string suite_out = "out";
  std::uint64_t suite_seed = 0;
  auto* suite = app.add_subcommand("suite",
                                   "run a canned flight experiment");
  suite->add_option("--experiment", experiment,
                    "courtyard | figure-eight | warehouse")
      ->required();
  suite->add_option("--scenarios", scenario_dir, "scenario corpus directory");
  suite->add_option("--out", suite_out, "output directory");
  auto* suite_seed_opt =
      suite->add_option("--seed", suite_seed, "override RNG seed");

  std::string plot_scenario;
  std::string plot_trace;
  std::string plot_avoidance;
  std::string plot_out = "out";
  auto* plot = app.add_subcommand("plot", "render world/trace SVG views");
  plot->add_option("--scenario", plot_scenario, "scenario JSON")->required();
  plot->add_option("--trace", plot_trace, "trace CSV (optional)");
  plot->add_option("--avoidance", plot_avoidance,
                   "avoidance diagnostics JSONL (optional)");
  plot->add_option("--out", plot_out, "output directory");

  std::vector<const char*> argv;
  argv.push_back("mavnav");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  if (run->parsed()) {
    if (*seed_opt) {
      flags.seed = seed_value;
    }
    if (*vmax_opt) {
      flags.vmax = vmax_value;
    }
    if (*noise_opt) {
      flags.noise_sigma = noise_value;
    }
    return cli_detail::cmd_run(flags);
  }
  if (suite->parsed()) {
    std::optional<std::uint64_t> seed;
    if (*suite_seed_opt) {
      seed = suite_seed;
    }
    return cli_detail::cmd_suite(experiment, scenario_dir, suite_out,
                                       seed);
  }
  if (plot->parsed()) {
    return cli_detail::cmd_plot(plot_scenario, plot_trace, plot_avoidance,
                                plot_out);
  }
  return kExitInputError;
}

}  // namespace mavnav
