#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

// --------------------------------------------------------------------------
// Rigid registration (point-to-point ICP)

struct IcpResult {
  RigidTransform transform;
  double rms = 0.0;
  int iterations = 0;
  std::vector<double> rms_history;
};

namespace detail {

// Uniform-grid nearest neighbor; query cost stays bounded for the box-world
// point counts this registration sees.
class PointHash {
 public:
  explicit PointHash(const std::vector<Vec3>& points, double cell)
      : points_(points), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto [x, y, z] = cell_of(points[i]);
      lo_[0] = std::min(lo_[0], x);
      lo_[1] = std::min(lo_[1], y);
      lo_[2] = std::min(lo_[2], z);
      hi_[0] = std::max(hi_[0], x);
      hi_[1] = std::max(hi_[1], y);
      hi_[2] = std::max(hi_[2], z);
      buckets_[pack(x, y, z)].push_back(i);
    }
  }

  std::size_t nearest(const Vec3& q) const {
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    const auto [kx, ky, kz] = cell_of(q);
    // All data lies within this Chebyshev radius of the query cell.
    const long max_ring =
        std::max({std::max(std::abs(kx - lo_[0]), std::abs(kx - hi_[0])),
                  std::max(std::abs(ky - lo_[1]), std::abs(ky - hi_[1])),
                  std::max(std::abs(kz - lo_[2]), std::abs(kz - hi_[2]))});
    for (long ring = 0; ring <= max_ring; ++ring) {
      // Any point in shell `ring` is at least (ring - 1) cells away, so an
      // incumbent within that radius is final.
      if (best != kNone) {
        const double reach = (ring - 1) * cell_;
        if (reach > 0.0 && best_d <= reach * reach) {
          return best;
        }
      }
      for (long dz = -ring; dz <= ring; ++dz) {
        for (long dy = -ring; dy <= ring; ++dy) {
          for (long dx = -ring; dx <= ring; ++dx) {
            if (std::max({std::labs(dx), std::labs(dy), std::labs(dz)}) !=
                ring) {
              continue;  // only the shell of this ring
            }
            const auto it = buckets_.find(pack(kx + dx, ky + dy, kz + dz));
            if (it == buckets_.end()) {
              continue;
            }
            for (const std::size_t i : it->second) {
              const double d = (points_[i] - q).norm_sq();
              if (d < best_d) {
                best_d = d;
                best = i;
              }
            }
          }
        }
      }
    }
    if (best != kNone) {
      return best;
    }
    // Fall back to linear scan for pathological spreads.
    best = 0;
    best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d = (points_[i] - q).norm_sq();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

 private:
  std::tuple<long, long, long> cell_of(const Vec3& p) const {
    return {static_cast<long>(std::floor(p.x / cell_)),
            static_cast<long>(std::floor(p.y / cell_)),
            static_cast<long>(std::floor(p.z / cell_))};
  }
  long long key(const Vec3& p) const {
    const auto [x, y, z] = cell_of(p);
    return pack(x, y, z);
  }
  static long long pack(long x, long y, long z) {
    return ((x & 0x1FFFFF) << 42) | ((y & 0x1FFFFF) << 21) | (z & 0x1FFFFF);
  }

  const std::vector<Vec3>& points_;
  double cell_;
  std::array<long, 3> lo_{std::numeric_limits<long>::max(),
                          std::numeric_limits<long>::max(),
                          std::numeric_limits<long>::max()};
  std::array<long, 3> hi_{std::numeric_limits<long>::min(),
                          std::numeric_limits<long>::min(),
                          std::numeric_limits<long>::min()};
  std::unordered_map<long long, std::vector<std::size_t>> buckets_;
};

inline void check_not_degenerate(const std::vector<Vec3>& pts,
                                 const char* which) {
  if (pts.empty()) {
    throw DegenerateError(std::string("icp_align: empty ") + which +
                          " point set");
  }
  Vec3 mean;
  for (const auto& p : pts) {
    mean += p;
  }
  mean = mean / static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d d(p.x - mean.x, p.y - mean.y, p.z - mean.z);
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // Rank < 2 (coincident or collinear) leaves the rotation unconstrained.
  if (eig.eigenvalues()(1) <= 1e-12 * std::max(1.0, eig.eigenvalues()(2))) {
    throw DegenerateError(std::string("icp_align: ") + which +
                          " points are collinear or coincident");
  }
}

// Least-squares rigid motion mapping `from` onto `to` (orthogonal Procrustes
// with the reflection guard).
inline RigidTransform rigid_fit(const std::vector<Vec3>& from,
                                const std::vector<Vec3>& to) {
  Vec3 cf, ct;
  for (std::size_t i = 0; i < from.size(); ++i) {
    cf += from[i];
    ct += to[i];
  }
  cf = cf / static_cast<double>(from.size());
  ct = ct / static_cast<double>(from.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Eigen::Vector3d a(from[i].x - cf.x, from[i].y - cf.y,
                            from[i].z - cf.z);
    const Eigen::Vector3d b(to[i].x - ct.x, to[i].y - ct.y, to[i].z - ct.z);
    h += a * b.transpose();
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixV() * svd.matrixU().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixV() * flip * svd.matrixU().transpose();
  }
  RigidTransform out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.r[3 * i + j] = r(i, j);
    }
  }
  out.t = ct - out.rotate(cf);
  return out;
}

}  // namespace detail

// Alternates nearest-neighbor correspondence with the closed-form rigid fit
// until the RMS improvement falls below `tol`. `initial` stands in for the
// coarse manual alignment.
inline IcpResult icp_align(const std::vector<Vec3>& model_points,
                           const std::vector<Vec3>& map_points,
                           const RigidTransform& initial, int max_iters = 50,
                           double tol = 1e-9) {
  detail::check_not_degenerate(model_points, "model");
  detail::check_not_degenerate(map_points, "map");

  // Bucket size from the map's spread.
  Vec3 lo = map_points.front(), hi = map_points.front();
  for (const auto& p : map_points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  const detail::PointHash hash(map_points, std::max(extent / 32.0, 1e-3));

  IcpResult res;
  res.transform = initial;
  double prev_rms = std::numeric_limits<double>::infinity();
  std::vector<Vec3> matched(model_points.size());
  for (int iter = 0; iter < max_iters; ++iter) {
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < model_points.size(); ++i) {
      const Vec3 p = res.transform.apply(model_points[i]);
      matched[i] = map_points[hash.nearest(p)];
      sq_sum += (p - matched[i]).norm_sq();
    }
    res.rms = std::sqrt(sq_sum / static_cast<double>(model_points.size()));
    res.rms_history.push_back(res.rms);
    res.iterations = iter + 1;
    if (std::abs(prev_rms - res.rms) < tol) {
      break;
    }
    prev_rms = res.rms;
    res.transform = detail::rigid_fit(model_points, matched);
  }
  return res;
}

// --------------------------------------------------------------------------
// Coverage mission generation

struct ViewPose {
  Pose4 pose;
  std::string unit_id;
  double standoff = 0.0;
};

enum class MissionMode { kFullShelfRow, kUnitList };

struct MissionRequest {
  MissionMode mode = MissionMode::kFullShelfRow;
  std::vector<std::string> rows;
  std::vector<std::string> units;
  std::optional<double> velocity_cap;
};

inline ViewPose view_pose_for(const ShelfRow& row, int column, int level,
                              double standoff) {
  const Vec3 n = row.front_normal();
  const Vec3 front = row.unit_front_center(column, level);
  ViewPose vp;
  vp.pose.position = front + n * standoff;
  vp.pose.yaw = wrap_angle(std::atan2(-n.y, -n.x));
  vp.unit_id = row.unit_id(column, level);
  vp.standoff = standoff;
  return vp;
}

// Boustrophedon sweep per row (bottom level first, direction alternating per
// level), then any single units in request order.
inline std::vector<ViewPose> generate_coverage(const SemanticShelfModel& model,
                                               const MissionRequest& request,
                                               double standoff) {
  if (!(standoff > 0.0)) {
    throw ConstraintError("generate_coverage: standoff must be > 0");
  }
  std::vector<ViewPose> poses;
  if (request.mode == MissionMode::kFullShelfRow || !request.rows.empty()) {
    for (const auto& row_id : request.rows) {
      const ShelfRow* row = model.find_row(row_id);
      if (row == nullptr) {
        throw LookupError("generate_coverage: unknown shelf row ID: " +
                          row_id);
      }
      for (int level = 1; level <= row->levels; ++level) {
        const bool forward = (level % 2) == 1;
        for (int k = 0; k < row->columns; ++k) {
          const int column = forward ? k + 1 : row->columns - k;
          poses.push_back(view_pose_for(*row, column, level, standoff));
        }
      }
    }
  }
  for (const auto& unit_id : request.units) {
    const UnitRef ref = model.find_unit(unit_id);  // throws LookupError
    poses.push_back(view_pose_for(*ref.row, ref.column, ref.level, standoff));
  }
  return poses;
}

// Collapse straight equal-yaw runs to their endpoints so sweeps become two
// waypoints instead of one per storage unit.
inline std::vector<ViewPose> merge_collinear(const std::vector<ViewPose>& poses,
                                             double tol) {
  if (tol < 0.0) {
    throw ConstraintError("merge_collinear: tol must be >= 0");
  }
  if (poses.size() <= 2) {
    return poses;
  }
  const auto run_collinear = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i <= hi; ++i) {
      if (std::abs(wrap_angle(poses[i].pose.yaw - poses[lo].pose.yaw)) >
          1e-6) {
        return false;
      }
      if (point_segment_distance(poses[i].pose.position,
                                 poses[lo].pose.position,
                                 poses[hi].pose.position) > tol) {
        return false;
      }
    }
    return true;
  };

  std::vector<ViewPose> out;
  std::size_t i = 0;
  while (i < poses.size()) {
    std::size_t j = i;
    while (j + 1 < poses.size() && run_collinear(i, j + 1)) {
      ++j;
    }
    out.push_back(poses[i]);
    if (j > i) {
      out.push_back(poses[j]);
    }
    i = j + 1;
  }
  return out;
}

// --------------------------------------------------------------------------
// Mission file (WMS interface stand-in)

inline MissionRequest parse_mission(const nlohmann::json& j,
                                    const SemanticShelfModel& model) {
  if (!j.contains("format") || j["format"].get<int>() != 1) {
    throw ParseError("mission: missing or unsupported 'format' (expect 1)");
  }
  MissionRequest req;
  const std::string mode = j.value("mode", std::string{"full-shelf-row"});
  if (mode == "full-shelf-row") {
    req.mode = MissionMode::kFullShelfRow;
  } else if (mode == "unit-list") {
    req.mode = MissionMode::kUnitList;
  } else {
    throw ParseError("mission: unknown mode '" + mode + "'");
  }
  for (const auto& r : j.value("rows", nlohmann::json::array())) {
    req.rows.push_back(r.get<std::string>());
  }
  for (const auto& u : j.value("units", nlohmann::json::array())) {
    req.units.push_back(u.get<std::string>());
  }
  if (j.contains("velocity_cap_mps")) {
    req.velocity_cap = j["velocity_cap_mps"].get<double>();
    if (*req.velocity_cap <= 0.0) {
      throw ParseError("mission: velocity_cap_mps must be positive");
    }
  }
  if (req.mode == MissionMode::kFullShelfRow && req.rows.empty()) {
    throw ParseError("mission: full-shelf-row mode needs a 'rows' list");
  }
  if (req.mode == MissionMode::kUnitList && req.units.empty()) {
    throw ParseError("mission: unit-list mode needs a 'units' list");
  }
  for (const auto& row_id : req.rows) {
    if (model.find_row(row_id) == nullptr) {
      throw LookupError("mission: unknown shelf row ID: " + row_id);
    }
  }
  for (const auto& unit_id : req.units) {
    model.find_unit(unit_id);  // throws LookupError naming the ID
  }
  return req;
}

inline MissionRequest load_mission(const std::string& path,
                                   const SemanticShelfModel& model) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open mission file: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("mission JSON parse failure in " + path + ": " +
                     e.what());
  }
  try {
    return parse_mission(j, model);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("mission field error in " + path + ": " + e.what());
  }
}

inline nlohmann::json mission_plan_to_json(const std::vector<ViewPose>& plan) {
  nlohmann::json j;
  j["format"] = 1;
  auto& arr = j["poses"] = nlohmann::json::array();
  for (const auto& vp : plan) {
    arr.push_back({{"x", vp.pose.position.x},
                   {"y", vp.pose.position.y},
                   {"z", vp.pose.position.z},
                   {"yaw", vp.pose.yaw},
                   {"unit", vp.unit_id},
                   {"standoff", vp.standoff}});
  }
  return j;
}

}  // namespace mavnav
