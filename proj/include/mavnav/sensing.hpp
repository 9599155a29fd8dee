#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/trajectory.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

// Two synchronized side-looking cameras, one per aisle side.
struct CameraModel {
  double h_apex_deg = 56.3;
  double v_apex_deg = 43.7;
  double frame_rate = 3.0;      // Hz
  double exposure = 0.004;      // s
  double max_range = 4.0;       // m
  std::array<double, 2> mount_yaw{kPi / 2, -kPi / 2};  // vs flight axis
};

// Sampling limit on tag patch contrast under motion blur.
inline double max_detectable_velocity(double exposure, double patch_edge,
                                      double nyquist_factor = 2.0) {
  if (!(exposure > 0.0) || !(patch_edge > 0.0)) {
    throw ConstraintError("max_detectable_velocity: positive inputs required");
  }
  return nyquist_factor * patch_edge / exposure;
}

enum class Sensor { kCamera0, kCamera1, kRfid };

struct Detection {
  int tag_id = 0;
  Vec3 position;
  double time = 0.0;
  Sensor sensor = Sensor::kCamera0;
  double strength = 1.0;
};

// Geometric gate set for one camera and one tag. Split out so tests can
// exercise the frustum decision against a brute-force angle check.
inline bool in_camera_frustum(const Vec3& relative, double camera_yaw,
                              const CameraModel& camera) {
  const double c = std::cos(camera_yaw);
  const double s = std::sin(camera_yaw);
  const double forward = c * relative.x + s * relative.y;
  const double lateral = -s * relative.x + c * relative.y;
  if (forward <= 0.0) {
    return false;
  }
  const double az = std::atan2(std::abs(lateral), forward);
  const double el = std::atan2(std::abs(relative.z), std::hypot(forward, lateral));
  return az <= deg2rad(camera.h_apex_deg / 2.0) &&
         el <= deg2rad(camera.v_apex_deg / 2.0);
}

// One synchronized frame from both cameras. A tag is detected when it is in
// range, inside a frustum, facing the camera, below the blur speed limit for
// its 8x8 payload grid, and unoccluded. The reported position carries
// isotropic Gaussian noise plus the caller's localization bias.
inline std::vector<Detection> visual_detect(
    const MavState& mav, const CameraModel& camera,
    const std::vector<Tag>& tags, const std::vector<Obstacle>& occluders,
    double time, std::mt19937_64& rng, double noise_sigma = 0.04,
    const Vec3& localization_bias = {}) {
  std::vector<Detection> out;
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  for (std::size_t cam = 0; cam < camera.mount_yaw.size(); ++cam) {
    const double cam_yaw = wrap_angle(mav.yaw + camera.mount_yaw[cam]);
    for (const auto& tag : tags) {
      if (tag.kind != TagKind::kVisual || tag.disabled) {
        continue;
      }
      const Vec3 rel = tag.position - mav.position();
      const double dist = rel.norm();
      if (dist > camera.max_range || dist <= 0.0) {
        continue;
      }
      if (!in_camera_frustum(rel, cam_yaw, camera)) {
        continue;
      }
      if (tag.normal.dot(rel.normalized()) >= 0.0) {
        continue;  // back side
      }
      // Relative speed at the tag: linear motion plus the yaw-rate lever arm.
      const Vec3 lever = Vec3{0, 0, mav.yaw_rate}.cross(rel);
      const double rel_speed = (mav.velocity() + lever).norm();
      const double patch = tag.edge / 8.0;
      if (rel_speed > max_detectable_velocity(camera.exposure, patch)) {
        continue;
      }
      if (segment_blocked(mav.position(),
                          tag.position + tag.normal * 0.01, occluders, time)) {
        continue;
      }
      Detection d;
      d.tag_id = tag.id;
      d.position = tag.position + localization_bias +
                   Vec3{gauss(rng), gauss(rng), gauss(rng)};
      d.time = time;
      d.sensor = cam == 0 ? Sensor::kCamera0 : Sensor::kCamera1;
      out.push_back(d);
    }
  }
  return out;
}

// Throttled reader: a read returns one in-range RFID tag, round-robin, with
// a 1/(1+d^2) strength proxy. RFID carries no tag pose, so the reported
// position is the MAV position at read time.
class RfidReader {
 public:
  explicit RfidReader(double reads_per_second = 20.0, double range = 3.0)
      : throttle_(reads_per_second), range_(range) {
    if (!(throttle_ > 0.0) || throttle_ > 750.0) {
      throw ConstraintError("rfid: throttle must be in (0, 750] reads/s");
    }
  }

  std::vector<Detection> tick(const MavState& mav,
                              const std::vector<Tag>& tags, double time) {
    std::vector<Detection> out;
    const long long due =
        static_cast<long long>(std::floor(time * throttle_ + 1e-9));
    while (reads_done_ < due) {
      ++reads_done_;
      std::vector<const Tag*> in_range;
      for (const auto& tag : tags) {
        if (tag.kind != TagKind::kRfid || tag.disabled) {
          continue;
        }
        if ((tag.position - mav.position()).norm() <= range_) {
          in_range.push_back(&tag);
        }
      }
      if (in_range.empty()) {
        continue;
      }
      const Tag* tag = in_range[cursor_ % in_range.size()];
      ++cursor_;
      const double d = (tag->position - mav.position()).norm();
      Detection det;
      det.tag_id = tag->id;
      det.position = mav.position();
      det.time = time;
      det.sensor = Sensor::kRfid;
      det.strength = 1.0 / (1.0 + d * d);
      out.push_back(det);
    }
    return out;
  }

  double range() const { return range_; }

 private:
  double throttle_;
  double range_;
  long long reads_done_ = 0;
  std::size_t cursor_ = 0;
};

// --------------------------------------------------------------------------
// Detection statistics across flights

struct TagFlightStats {
  int count = 0;
  Vec3 mean;
  std::optional<double> sigma_cm;  // undefined below two detections
};

struct TagStats {
  int tag_id = 0;
  std::vector<TagFlightStats> per_flight;
  // Euclidean distances between flight means, pairs (0,1), (0,2), (1,2), ...
  std::vector<double> mean_distances_cm;
};

inline std::vector<TagStats> detection_statistics(
    const std::vector<std::vector<Detection>>& flights) {
  if (flights.empty()) {
    throw ConstraintError("detection_statistics: need at least one flight");
  }
  std::map<int, TagStats> by_tag;
  for (std::size_t f = 0; f < flights.size(); ++f) {
    std::map<int, std::vector<Vec3>> positions;
    for (const auto& det : flights[f]) {
      positions[det.tag_id].push_back(det.position);
    }
    for (const auto& [id, pts] : positions) {
      auto& stats = by_tag[id];
      stats.tag_id = id;
      stats.per_flight.resize(flights.size());
      TagFlightStats& tf = stats.per_flight[f];
      tf.count = static_cast<int>(pts.size());
      for (const auto& p : pts) {
        tf.mean += p;
      }
      tf.mean = tf.mean / static_cast<double>(pts.size());
      if (pts.size() >= 2) {
        // Root-mean of the per-axis sample variances, reported in cm.
        double var_sum = 0.0;
        for (const auto& p : pts) {
          const Vec3 d = p - tf.mean;
          var_sum += d.norm_sq();
        }
        const double var_per_axis =
            var_sum / (3.0 * (static_cast<double>(pts.size()) - 1.0));
        tf.sigma_cm = 100.0 * std::sqrt(var_per_axis);
      }
    }
  }
  std::vector<TagStats> out;
  for (auto& [id, stats] : by_tag) {
    stats.per_flight.resize(flights.size());
    for (std::size_t a = 0; a < flights.size(); ++a) {
      for (std::size_t b = a + 1; b < flights.size(); ++b) {
        if (stats.per_flight[a].count > 0 && stats.per_flight[b].count > 0) {
          stats.mean_distances_cm.push_back(
              100.0 *
              (stats.per_flight[a].mean - stats.per_flight[b].mean).norm());
        } else {
          stats.mean_distances_cm.push_back(
              std::numeric_limits<double>::quiet_NaN());
        }
      }
    }
    out.push_back(stats);
  }
  return out;
}

inline void write_detection_stats_csv(std::ostream& os,
                                      const std::vector<TagStats>& stats,
                                      std::size_t n_flights) {
  os << "tag_id";
  for (std::size_t f = 1; f <= n_flights; ++f) {
    os << ",n" << f;
  }
  for (std::size_t f = 1; f <= n_flights; ++f) {
    os << ",sigma" << f << "_cm";
  }
  for (std::size_t a = 1; a <= n_flights; ++a) {
    for (std::size_t b = a + 1; b <= n_flights; ++b) {
      os << ",mu" << a << "_" << b << "_cm";
    }
  }
  os << '\n';
  for (const auto& s : stats) {
    os << s.tag_id;
    for (const auto& tf : s.per_flight) {
      os << ',' << tf.count;
    }
    for (const auto& tf : s.per_flight) {
      os << ',';
      if (tf.sigma_cm) {
        os << *tf.sigma_cm;
      } else {
        os << '-';
      }
    }
    for (const double mu : s.mean_distances_cm) {
      os << ',';
      if (std::isnan(mu)) {
        os << '-';
      } else {
        os << mu;
      }
    }
    os << '\n';
  }
}

}  // namespace mavnav
