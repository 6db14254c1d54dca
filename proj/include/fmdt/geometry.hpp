#pragma once

#include <cmath>

namespace fmdt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Planar rigid transform p' = R(theta) * p + t, rotation about the origin.
struct RigidTransform {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Vec2 apply(Vec2 p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
  }

  Vec2 rotate(Vec2 v) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
  }

  RigidTransform inverse() const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {-theta, -(c * tx + s * ty), -(-s * tx + c * ty)};
  }

  /// Composition: (b.then_after(a))(p) == b(a(p)).
  static RigidTransform compose(const RigidTransform& b, const RigidTransform& a) {
    const double c = std::cos(b.theta), s = std::sin(b.theta);
    return {b.theta + a.theta, c * a.tx - s * a.ty + b.tx, s * a.tx + c * a.ty + b.ty};
  }

  /// Rotation by theta about a fixed center, followed by an extra translation.
  static RigidTransform about_point(double theta, Vec2 center, Vec2 extra = {0.0, 0.0}) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {theta,
            center.x - (c * center.x - s * center.y) + extra.x,
            center.y - (s * center.x + c * center.y) + extra.y};
  }

  bool is_identity(double eps = 0.0) const {
    return std::abs(theta) <= eps && std::abs(tx) <= eps && std::abs(ty) <= eps;
  }
};

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Unsigned angle between two vectors, in degrees, range [0, 180].
inline double angle_between_deg(Vec2 a, Vec2 b) {
  return rad_to_deg(std::atan2(std::abs(a.cross(b)), a.dot(b)));
}

}  // namespace fmdt
