#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

namespace mavnav {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) {
    r += 2.0 * kPi;
  }
  return r;
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm_sq() const { return dot(*this); }
  double norm() const { return std::sqrt(norm_sq()); }
  double horizontal_norm() const { return std::hypot(x, y); }

  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? *this / n : Vec3{};
  }

  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// 4D pose: position plus yaw, yaw normalized to (-pi, pi].
struct Pose4 {
  Vec3 position;
  double yaw = 0.0;

  static Pose4 make(const Vec3& p, double yaw) { return {p, wrap_angle(yaw)}; }
};

struct Aabb {
  Vec3 lo;
  Vec3 hi;

  Vec3 size() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }

  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
           p.z >= lo.z && p.z <= hi.z;
  }

  // Positive-measure overlap on all axes (touching faces do not count).
  bool intersects(const Aabb& o) const {
    return std::max(lo.x, o.lo.x) < std::min(hi.x, o.hi.x) &&
           std::max(lo.y, o.lo.y) < std::min(hi.y, o.hi.y) &&
           std::max(lo.z, o.lo.z) < std::min(hi.z, o.hi.z);
  }

  Vec3 closest_point(const Vec3& p) const {
    return {std::clamp(p.x, lo.x, hi.x), std::clamp(p.y, lo.y, hi.y),
            std::clamp(p.z, lo.z, hi.z)};
  }

  Aabb expanded(double r) const {
    return {lo - Vec3{r, r, r}, hi + Vec3{r, r, r}};
  }

  Aabb translated(const Vec3& d) const { return {lo + d, hi + d}; }
};

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a,
                                     const Vec3& b) {
  const Vec3 ab = b - a;
  const double len_sq = ab.norm_sq();
  if (len_sq <= 0.0) {
    return (p - a).norm();
  }
  const double t = std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

// Rotation (row-major 3x3) + translation. Orthonormal with det +1.
struct RigidTransform {
  std::array<double, 9> r{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 t;

  static RigidTransform identity() { return {}; }

  static RigidTransform rotation_z(double angle, const Vec3& translation = {}) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    RigidTransform out;
    out.r = {c, -s, 0, s, c, 0, 0, 0, 1};
    out.t = translation;
    return out;
  }

  Vec3 apply(const Vec3& p) const {
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z + t.x,
            r[3] * p.x + r[4] * p.y + r[5] * p.z + t.y,
            r[6] * p.x + r[7] * p.y + r[8] * p.z + t.z};
  }

  Vec3 rotate(const Vec3& p) const {
    return {r[0] * p.x + r[1] * p.y + r[2] * p.z,
            r[3] * p.x + r[4] * p.y + r[5] * p.z,
            r[6] * p.x + r[7] * p.y + r[8] * p.z};
  }

  RigidTransform compose(const RigidTransform& other) const {
    // this ∘ other: apply other first.
    RigidTransform out;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double sum = 0.0;
        for (int k = 0; k < 3; ++k) {
          sum += r[3 * i + k] * other.r[3 * k + j];
        }
        out.r[3 * i + j] = sum;
      }
    }
    out.t = apply(other.t);
    return out;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        out.r[3 * i + j] = r[3 * j + i];
      }
    }
    out.t = -out.rotate(t);
    return out;
  }

  // Frobenius deviation of R^T R from identity.
  double orthonormality_error() const {
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (int k = 0; k < 3; ++k) {
          dot += r[3 * k + i] * r[3 * k + j];
        }
        const double want = (i == j) ? 1.0 : 0.0;
        err += (dot - want) * (dot - want);
      }
    }
    return std::sqrt(err);
  }

  double determinant() const {
    return r[0] * (r[4] * r[8] - r[5] * r[7]) -
           r[1] * (r[3] * r[8] - r[5] * r[6]) +
           r[2] * (r[3] * r[7] - r[4] * r[6]);
  }
};

}  // namespace mavnav
