#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"

namespace mavnav {

// Lidar vertical half field of view; also fixes the anisotropic voxel ratio.
constexpr double kLidarFovDeg = 15.0;
inline double visibility_slope() { return std::tan(deg2rad(kLidarFovDeg)); }

enum class GridMode { kIsotropic, kVisibility };

enum class ObstacleKind { kStatic, kDynamic };
enum class ShapeType { kBox, kSphere };

struct ScheduleKey {
  double time = 0.0;
  Vec3 position;
};

// Static or dynamic solid. The shape is stored relative to its center; the
// center follows a piecewise-linear waypoint schedule (single entry = static).
struct Obstacle {
  ObstacleKind kind = ObstacleKind::kStatic;
  ShapeType shape = ShapeType::kBox;
  Vec3 half_extents;  // box
  double radius = 0.0;  // sphere
  std::vector<ScheduleKey> schedule{{0.0, Vec3{}}};

  static Obstacle make_box(const Aabb& box) {
    Obstacle o;
    o.shape = ShapeType::kBox;
    o.half_extents = box.size() * 0.5;
    o.schedule = {{0.0, box.center()}};
    return o;
  }

  static Obstacle make_sphere(const Vec3& center, double radius) {
    Obstacle o;
    o.shape = ShapeType::kSphere;
    o.radius = radius;
    o.schedule = {{0.0, center}};
    return o;
  }

  Vec3 center_at(double t) const {
    if (schedule.size() == 1 || t <= schedule.front().time) {
      return schedule.front().position;
    }
    if (t >= schedule.back().time) {
      return schedule.back().position;
    }
    for (std::size_t i = 1; i < schedule.size(); ++i) {
      if (t <= schedule[i].time) {
        const auto& a = schedule[i - 1];
        const auto& b = schedule[i];
        const double u = (t - a.time) / (b.time - a.time);
        return a.position + (b.position - a.position) * u;
      }
    }
    return schedule.back().position;
  }

  Aabb bounding_box_at(double t) const {
    const Vec3 c = center_at(t);
    const Vec3 h = shape == ShapeType::kBox
                       ? half_extents
                       : Vec3{radius, radius, radius};
    return {c - h, c + h};
  }

  // Closest surface point to p. Inside the solid the distance clamps to 0 and
  // the direction points at the center.
  std::pair<double, Vec3> closest_surface_point(const Vec3& p,
                                                double t) const {
    const Vec3 c = center_at(t);
    if (shape == ShapeType::kSphere) {
      const Vec3 d = p - c;
      const double n = d.norm();
      if (n <= radius || n == 0.0) {
        return {0.0, p};
      }
      return {n - radius, c + d * (radius / n)};
    }
    const Aabb box{c - half_extents, c + half_extents};
    const Vec3 q = box.closest_point(p);
    const double dist = (p - q).norm();
    if (dist == 0.0) {
      return {0.0, p};
    }
    return {dist, q};
  }
};

struct ShelfRow {
  std::string id;
  Vec3 base;        // ground corner of column 1 on the front face
  Vec3 direction;   // planar unit vector along columns
  int columns = 0;
  int levels = 0;
  double unit_width = 1.0;
  double unit_height = 1.0;
  double unit_depth = 1.0;

  // Outward normal of the shelf front (the aisle side).
  Vec3 front_normal() const { return Vec3{direction.y, -direction.x, 0.0}; }

  std::string unit_id(int column, int level) const {
    return id + "-C" + std::to_string(column) + "-L" + std::to_string(level);
  }

  Vec3 unit_front_center(int column, int level) const {
    return base + direction * ((column - 0.5) * unit_width) +
           Vec3{0.0, 0.0, (level - 0.5) * unit_height};
  }

  // Whole-row body (all columns x all levels x depth behind the front face).
  Aabb body() const {
    const Vec3 n = front_normal();
    const Vec3 a = base;
    const Vec3 b = base + direction * (columns * unit_width) -
                   n * unit_depth + Vec3{0.0, 0.0, levels * unit_height};
    return {{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
            {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
  }
};

struct UnitRef {
  const ShelfRow* row = nullptr;
  int column = 0;
  int level = 0;
};

struct SemanticShelfModel {
  std::vector<ShelfRow> rows;

  const ShelfRow* find_row(const std::string& row_id) const {
    for (const auto& r : rows) {
      if (r.id == row_id) {
        return &r;
      }
    }
    return nullptr;
  }

  UnitRef find_unit(const std::string& unit_id) const {
    for (const auto& r : rows) {
      for (int c = 1; c <= r.columns; ++c) {
        for (int l = 1; l <= r.levels; ++l) {
          if (r.unit_id(c, l) == unit_id) {
            return {&r, c, l};
          }
        }
      }
    }
    throw LookupError("unknown storage unit ID: " + unit_id);
  }

  // Registration point set: front-face corners and centers of every unit.
  std::vector<Vec3> sample_points() const {
    std::vector<Vec3> pts;
    for (const auto& r : rows) {
      for (int c = 1; c <= r.columns; ++c) {
        for (int l = 1; l <= r.levels; ++l) {
          pts.push_back(r.unit_front_center(c, l));
        }
      }
    }
    return pts;
  }
};

enum class TagKind { kVisual, kRfid };

struct Tag {
  int id = 0;
  TagKind kind = TagKind::kVisual;
  Vec3 position;
  Vec3 normal{0.0, -1.0, 0.0};
  double edge = 0.16;
  bool disabled = false;
};

struct DisturbanceConfig {
  bool enabled = false;
  double theta = 0.7;   // OU mean-reversion rate [1/s]
  double sigma = 0.0;   // OU diffusion [m/s^2 per sqrt(s)]
  double cap = 0.0;     // hard bound on |a| [m/s^2]
  bool on_x = true;
  bool on_y = true;
  bool on_z = false;
};

struct AvoidanceConfigOverride {
  std::optional<double> d_active;
  std::optional<double> d_passive;
};

struct LimitsConfig {
  double v_max = 7.8;
  double a_max = 3.5;
  double j_max = 4.0;
};

struct ScenarioWorld {
  int format = 1;
  std::string name;
  Aabb bounds;
  SemanticShelfModel shelves;
  std::vector<Obstacle> obstacles;
  std::vector<Tag> tags;
  DisturbanceConfig disturbance;
  AvoidanceConfigOverride avoidance;
  LimitsConfig limits;
  double mav_radius = 0.85;
  std::uint64_t seed = 0;
  std::optional<Pose4> start;

  // Shelf bodies plus declared static obstacles; what the planner grid sees.
  std::vector<Obstacle> static_solids() const {
    std::vector<Obstacle> out;
    for (const auto& r : shelves.rows) {
      out.push_back(Obstacle::make_box(r.body()));
    }
    for (const auto& o : obstacles) {
      if (o.kind == ObstacleKind::kStatic) {
        out.push_back(o);
      }
    }
    return out;
  }

  // Everything the reactive layer can sense at time t.
  std::vector<Obstacle> all_solids() const {
    std::vector<Obstacle> out = static_solids();
    for (const auto& o : obstacles) {
      if (o.kind == ObstacleKind::kDynamic) {
        out.push_back(o);
      }
    }
    return out;
  }
};

// --------------------------------------------------------------------------
// Occupancy grid

struct CellIndex {
  int x = 0;
  int y = 0;
  int z = 0;
  bool operator==(const CellIndex&) const = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Vec3& origin, double h_res, double v_res, int nx, int ny,
                int nz)
      : origin_(origin),
        h_res_(h_res),
        v_res_(v_res),
        nx_(nx),
        ny_(ny),
        nz_(nz),
        occ_(static_cast<std::size_t>(nx) * ny * nz, 0) {}

  const Vec3& origin() const { return origin_; }
  double horizontal_resolution() const { return h_res_; }
  double vertical_resolution() const { return v_res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  std::size_t cell_count() const { return occ_.size(); }

  bool in_bounds(const CellIndex& c) const {
    return c.x >= 0 && c.x < nx_ && c.y >= 0 && c.y < ny_ && c.z >= 0 &&
           c.z < nz_;
  }

  std::size_t flat(const CellIndex& c) const {
    return (static_cast<std::size_t>(c.z) * ny_ + c.y) * nx_ + c.x;
  }

  bool occupied(const CellIndex& c) const { return occ_[flat(c)] != 0; }
  void set_occupied(const CellIndex& c, bool v = true) {
    occ_[flat(c)] = v ? 1 : 0;
  }

  Vec3 cell_center(const CellIndex& c) const {
    return {origin_.x + (c.x + 0.5) * h_res_, origin_.y + (c.y + 0.5) * h_res_,
            origin_.z + (c.z + 0.5) * v_res_};
  }

  CellIndex world_to_cell(const Vec3& p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / h_res_)),
            static_cast<int>(std::floor((p.y - origin_.y) / h_res_)),
            static_cast<int>(std::floor((p.z - origin_.z) / v_res_))};
  }

  Aabb cell_box(const CellIndex& c) const {
    const Vec3 lo{origin_.x + c.x * h_res_, origin_.y + c.y * h_res_,
                  origin_.z + c.z * v_res_};
    return {lo, lo + Vec3{h_res_, h_res_, v_res_}};
  }

  std::size_t occupied_count() const {
    std::size_t n = 0;
    for (auto v : occ_) {
      n += v;
    }
    return n;
  }

  std::vector<Vec3> occupied_centers() const {
    std::vector<Vec3> out;
    for (int z = 0; z < nz_; ++z) {
      for (int y = 0; y < ny_; ++y) {
        for (int x = 0; x < nx_; ++x) {
          const CellIndex c{x, y, z};
          if (occupied(c)) {
            out.push_back(cell_center(c));
          }
        }
      }
    }
    return out;
  }

 private:
  Vec3 origin_;
  double h_res_ = 1.0;
  double v_res_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<std::uint8_t> occ_;
};

// Cell-count guard for rasterize.
constexpr std::size_t kDefaultCellCap = 100'000'000;

// Conservative rasterization: a cell is occupied when its volume has
// positive-measure intersection with any shelf body or static obstacle.
// Dynamic obstacles are deliberately left out; they are handled by the
// reactive layer only.
inline OccupancyGrid rasterize(const ScenarioWorld& world,
                               double horizontal_resolution, GridMode mode,
                               std::size_t cell_cap = kDefaultCellCap) {
  if (!(horizontal_resolution > 0.0)) {
    throw ConstraintError("rasterize: resolution must be > 0");
  }
  const double v_res = mode == GridMode::kVisibility
                           ? horizontal_resolution * visibility_slope()
                           : horizontal_resolution;
  const Vec3 size = world.bounds.size();
  const int nx = std::max(1, static_cast<int>(std::ceil(size.x / horizontal_resolution - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(size.y / horizontal_resolution - 1e-9)));
  const int nz = std::max(1, static_cast<int>(std::ceil(size.z / v_res - 1e-9)));
  const std::size_t total = static_cast<std::size_t>(nx) * ny * nz;
  if (total > cell_cap) {
    std::ostringstream msg;
    msg << "rasterize: " << total << " cells exceeds cap " << cell_cap;
    throw OversizeError(msg.str());
  }

  OccupancyGrid grid(world.bounds.lo, horizontal_resolution, v_res, nx, ny, nz);
  for (const auto& solid : world.static_solids()) {
    const Aabb bb = solid.bounding_box_at(0.0);
    const CellIndex lo = grid.world_to_cell(bb.lo);
    const CellIndex hi = grid.world_to_cell(bb.hi);
    for (int z = std::max(0, lo.z); z <= std::min(nz - 1, hi.z); ++z) {
      for (int y = std::max(0, lo.y); y <= std::min(ny - 1, hi.y); ++y) {
        for (int x = std::max(0, lo.x); x <= std::min(nx - 1, hi.x); ++x) {
          const CellIndex c{x, y, z};
          const Aabb cb = grid.cell_box(c);
          bool hit = false;
          if (solid.shape == ShapeType::kBox) {
            hit = cb.intersects(bb);
          } else {
            const Vec3 center = solid.center_at(0.0);
            const Vec3 q = cb.closest_point(center);
            hit = (q - center).norm() < solid.radius;
          }
          if (hit) {
            grid.set_occupied(c);
          }
        }
      }
    }
  }
  return grid;
}

// Configuration-space expansion: occupied iff any originally occupied cell
// center lies within metric distance `radius` of this cell's center.
inline OccupancyGrid inflate(const OccupancyGrid& grid, double radius) {
  if (radius < 0.0) {
    throw ConstraintError("inflate: radius must be >= 0");
  }
  if (radius == 0.0) {
    return grid;
  }
  const double hr = grid.horizontal_resolution();
  const double vr = grid.vertical_resolution();
  const int rx = static_cast<int>(std::floor(radius / hr + 1e-12));
  const int rz = static_cast<int>(std::floor(radius / vr + 1e-12));
  std::vector<CellIndex> stencil;
  for (int dz = -rz; dz <= rz; ++dz) {
    for (int dy = -rx; dy <= rx; ++dy) {
      for (int dx = -rx; dx <= rx; ++dx) {
        const double d2 = (dx * hr) * (dx * hr) + (dy * hr) * (dy * hr) +
                          (dz * vr) * (dz * vr);
        if (d2 <= radius * radius + 1e-12) {
          stencil.push_back({dx, dy, dz});
        }
      }
    }
  }

  OccupancyGrid out = grid;
  for (int z = 0; z < grid.nz(); ++z) {
    for (int y = 0; y < grid.ny(); ++y) {
      for (int x = 0; x < grid.nx(); ++x) {
        const CellIndex c{x, y, z};
        if (!grid.occupied(c)) {
          continue;
        }
        for (const auto& d : stencil) {
          const CellIndex n{x + d.x, y + d.y, z + d.z};
          if (out.in_bounds(n)) {
            out.set_occupied(n);
          }
        }
      }
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Nearest-obstacle queries

struct ObstacleHit {
  double distance = 0.0;
  Vec3 direction;      // unit vector from the query point to the surface
  Vec3 surface_point;
  std::size_t obstacle_index = 0;
};

// True when some part of the obstacle lies within the vertical angular band
// +/- fov around the horizontal plane through p.
inline bool within_vertical_band(const Vec3& p, const Obstacle& o, double t,
                                 double fov_rad) {
  const Aabb bb = o.bounding_box_at(t);
  if (o.shape == ShapeType::kSphere) {
    if (p.z >= bb.lo.z && p.z <= bb.hi.z) {
      return true;
    }
    const Vec3 c = o.center_at(t);
    const Vec3 d = c - p;
    const double dist = d.norm();
    if (dist <= o.radius) {
      return true;
    }
    const double elev = std::asin(std::clamp(std::abs(d.z) / dist, 0.0, 1.0));
    const double ang_radius = std::asin(std::clamp(o.radius / dist, 0.0, 1.0));
    return elev - ang_radius <= fov_rad;
  }
  // Box: a horizontal slab through p intersecting the box gives elevation 0.
  if (p.z >= bb.lo.z && p.z <= bb.hi.z) {
    return true;
  }
  // Entirely above or below: the shallowest surface point is the corner of
  // the nearest horizontal face with the largest horizontal offset, at
  // elevation atan(dz_min / h_max).
  const double dz = p.z < bb.lo.z ? bb.lo.z - p.z : p.z - bb.hi.z;
  double h_max = 0.0;
  for (int ix = 0; ix < 2; ++ix) {
    for (int iy = 0; iy < 2; ++iy) {
      const double cx = ix ? bb.hi.x : bb.lo.x;
      const double cy = iy ? bb.hi.y : bb.lo.y;
      h_max = std::max(h_max, std::hypot(cx - p.x, cy - p.y));
    }
  }
  const double min_elev = std::atan2(dz, h_max);
  return min_elev <= fov_rad;
}

// Per-obstacle nearest surface points at time t, optionally restricted to the
// sensor's vertical field of view.
inline std::vector<ObstacleHit> obstacle_hits(
    const Vec3& point, const std::vector<Obstacle>& obstacles, double t,
    std::optional<double> fov_limit_deg = std::nullopt) {
  std::vector<ObstacleHit> hits;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& o = obstacles[i];
    if (fov_limit_deg &&
        !within_vertical_band(point, o, t, deg2rad(*fov_limit_deg))) {
      continue;
    }
    auto [dist, surf] = o.closest_surface_point(point, t);
    ObstacleHit hit;
    hit.distance = dist;
    hit.surface_point = surf;
    hit.obstacle_index = i;
    if (dist > 0.0) {
      hit.direction = (surf - point).normalized();
    } else {
      hit.direction = (o.center_at(t) - point).normalized();
    }
    hits.push_back(hit);
  }
  return hits;
}

inline std::optional<ObstacleHit> nearest_obstacle(
    const Vec3& point, const std::vector<Obstacle>& obstacles, double t,
    std::optional<double> fov_limit_deg = std::nullopt) {
  const auto hits = obstacle_hits(point, obstacles, t, fov_limit_deg);
  if (hits.empty()) {
    return std::nullopt;
  }
  const ObstacleHit* best = &hits.front();
  for (const auto& h : hits) {
    if (h.distance < best->distance) {
      best = &h;
    }
  }
  return *best;
}

// Does segment [a, b] pass through any solid? Used for line-of-sight tests.
inline bool segment_blocked(const Vec3& a, const Vec3& b,
                            const std::vector<Obstacle>& obstacles, double t) {
  const Vec3 d = b - a;
  const double len = d.norm();
  if (len <= 0.0) {
    return false;
  }
  for (const auto& o : obstacles) {
    if (o.shape == ShapeType::kSphere) {
      const Vec3 c = o.center_at(t);
      const Vec3 m = a - c;
      const double bq = m.dot(d) / (len * len);
      const double tq = std::clamp(-bq, 0.0, 1.0);
      const Vec3 p = a + d * tq;
      if ((p - c).norm() < o.radius) {
        return true;
      }
    } else {
      // Slab test.
      const Aabb bb = o.bounding_box_at(t);
      double t0 = 0.0;
      double t1 = 1.0;
      bool miss = false;
      const double av[3] = {a.x, a.y, a.z};
      const double dv[3] = {d.x, d.y, d.z};
      const double lov[3] = {bb.lo.x, bb.lo.y, bb.lo.z};
      const double hiv[3] = {bb.hi.x, bb.hi.y, bb.hi.z};
      for (int axis = 0; axis < 3 && !miss; ++axis) {
        if (std::abs(dv[axis]) < 1e-12) {
          if (av[axis] < lov[axis] || av[axis] > hiv[axis]) {
            miss = true;
          }
          continue;
        }
        double u0 = (lov[axis] - av[axis]) / dv[axis];
        double u1 = (hiv[axis] - av[axis]) / dv[axis];
        if (u0 > u1) {
          std::swap(u0, u1);
        }
        t0 = std::max(t0, u0);
        t1 = std::min(t1, u1);
        if (t0 > t1) {
          miss = true;
        }
      }
      if (!miss && t1 - t0 > 1e-9) {
        return true;
      }
    }
  }
  return false;
}

// --------------------------------------------------------------------------
// Scenario file

namespace detail {

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError("expected [x, y, z] array at " + where);
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline ScenarioWorld parse_scenario(const nlohmann::json& j) {
  ScenarioWorld w;
  if (!j.contains("format") || j["format"].get<int>() != 1) {
    throw ParseError("scenario: missing or unsupported 'format' (expect 1)");
  }
  if (!j.contains("bounds")) {
    throw ParseError("scenario: missing 'bounds'");
  }
  w.name = j.value("name", std::string{});
  w.bounds.lo = detail::parse_vec3(j["bounds"]["min"], "bounds.min");
  w.bounds.hi = detail::parse_vec3(j["bounds"]["max"], "bounds.max");
  if (!(w.bounds.lo.x < w.bounds.hi.x && w.bounds.lo.y < w.bounds.hi.y &&
        w.bounds.lo.z < w.bounds.hi.z)) {
    throw ParseError("scenario: bounds.min must be strictly below bounds.max");
  }
  w.seed = j.value("seed", std::uint64_t{0});
  w.mav_radius = j.value("mav_radius", 0.85);
  if (j.contains("start")) {
    const auto& js = j["start"];
    w.start = Pose4::make(detail::parse_vec3(js.at("position"),
                                             "start.position"),
                          js.value("yaw", 0.0));
  }

  for (const auto& js : j.value("shelves", nlohmann::json::array())) {
    ShelfRow r;
    r.id = js.at("id").get<std::string>();
    r.base = detail::parse_vec3(js.at("base"), "shelves.base");
    r.direction =
        detail::parse_vec3(js.at("direction"), "shelves.direction").normalized();
    if (std::abs(r.direction.z) > 1e-9) {
      throw ParseError("scenario: shelf row direction must be planar: " + r.id);
    }
    r.columns = js.at("columns").get<int>();
    r.levels = js.at("levels").get<int>();
    r.unit_width = js.at("unit_width").get<double>();
    r.unit_height = js.at("unit_height").get<double>();
    r.unit_depth = js.value("unit_depth", 1.0);
    if (r.unit_width <= 0.0 || r.unit_height <= 0.0 || r.unit_depth <= 0.0 ||
        r.columns <= 0 || r.levels <= 0) {
      throw ParseError("scenario: shelf row dimensions must be positive: " +
                       r.id);
    }
    if (w.shelves.find_row(r.id) != nullptr) {
      throw ParseError("scenario: duplicate shelf row ID: " + r.id);
    }
    w.shelves.rows.push_back(r);
  }

  for (const auto& jo : j.value("obstacles", nlohmann::json::array())) {
    Obstacle o;
    const std::string kind = jo.value("kind", std::string{"static"});
    o.kind = kind == "dynamic" ? ObstacleKind::kDynamic : ObstacleKind::kStatic;
    const auto& shape = jo.at("shape");
    const std::string type = shape.at("type").get<std::string>();
    if (type == "box") {
      const Vec3 lo = detail::parse_vec3(shape.at("min"), "obstacle.shape.min");
      const Vec3 hi = detail::parse_vec3(shape.at("max"), "obstacle.shape.max");
      if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z)) {
        throw ParseError("scenario: obstacle box extents must be positive");
      }
      o = Obstacle::make_box({lo, hi});
    } else if (type == "sphere") {
      const Vec3 c =
          detail::parse_vec3(shape.at("center"), "obstacle.shape.center");
      const double r = shape.at("radius").get<double>();
      if (r <= 0.0) {
        throw ParseError("scenario: obstacle sphere radius must be positive");
      }
      o = Obstacle::make_sphere(c, r);
    } else {
      throw ParseError("scenario: unknown obstacle shape type: " + type);
    }
    o.kind = kind == "dynamic" ? ObstacleKind::kDynamic : ObstacleKind::kStatic;
    if (jo.contains("schedule")) {
      o.schedule.clear();
      double prev = -1.0;
      for (const auto& k : jo["schedule"]) {
        ScheduleKey key;
        key.time = k.at("t").get<double>();
        key.position = detail::parse_vec3(k.at("pos"), "obstacle.schedule.pos");
        if (key.time <= prev) {
          throw ParseError("scenario: schedule times must strictly increase");
        }
        prev = key.time;
        o.schedule.push_back(key);
      }
      if (o.schedule.empty()) {
        throw ParseError("scenario: empty obstacle schedule");
      }
    }
    w.obstacles.push_back(o);
  }

  for (const auto& jt : j.value("tags", nlohmann::json::array())) {
    Tag t;
    t.id = jt.at("id").get<int>();
    const std::string kind = jt.value("kind", std::string{"visual"});
    t.kind = kind == "rfid" ? TagKind::kRfid : TagKind::kVisual;
    t.position = detail::parse_vec3(jt.at("position"), "tag.position");
    if (jt.contains("normal")) {
      t.normal = detail::parse_vec3(jt["normal"], "tag.normal").normalized();
    }
    t.edge = jt.value("edge", 0.16);
    t.disabled = jt.value("disabled", false);
    if (t.edge <= 0.0) {
      throw ParseError("scenario: tag edge must be positive");
    }
    w.tags.push_back(t);
  }

  if (j.contains("disturbances")) {
    const auto& jd = j["disturbances"];
    w.disturbance.enabled = true;
    w.disturbance.theta = jd.value("theta", 0.7);
    w.disturbance.sigma = jd.value("sigma", 0.0);
    w.disturbance.cap = jd.value("cap", 0.0);
    if (jd.contains("axes")) {
      const std::string axes = jd["axes"].get<std::string>();
      w.disturbance.on_x = axes.find('x') != std::string::npos;
      w.disturbance.on_y = axes.find('y') != std::string::npos;
      w.disturbance.on_z = axes.find('z') != std::string::npos;
    }
  }

  if (j.contains("avoidance")) {
    const auto& ja = j["avoidance"];
    if (ja.contains("d_active")) {
      w.avoidance.d_active = ja["d_active"].get<double>();
    }
    if (ja.contains("d_passive")) {
      w.avoidance.d_passive = ja["d_passive"].get<double>();
    }
  }

  if (j.contains("limits")) {
    const auto& jl = j["limits"];
    w.limits.v_max = jl.value("v_max", w.limits.v_max);
    w.limits.a_max = jl.value("a_max", w.limits.a_max);
    w.limits.j_max = jl.value("j_max", w.limits.j_max);
  }
  return w;
}

inline ScenarioWorld load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open scenario file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario JSON parse failure in " + path + ": " +
                     e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario field error in " + path + ": " + e.what());
  }
}

}  // namespace mavnav
