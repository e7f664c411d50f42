#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace ql::phys {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 cross_sv(double s, const Vec2& v) { return Vec2(-s * v.y(), s * v.x()); }
inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

struct SimulationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// convex polygon, counter-clockwise vertices in body frame
struct Polygon {
  std::vector<Vec2> verts;

  static Polygon box(double half_w, double half_h) {
    Polygon p;
    p.verts = {{-half_w, -half_h}, {half_w, -half_h}, {half_w, half_h}, {-half_w, half_h}};
    return p;
  }
  // area and second moment of area about the centroid (unit density)
  double area() const;
  double inertia_per_mass() const;  // I/m about the centroid
  bool is_ccw_convex() const;
};

struct Body {
  Vec2 position{0.0, 0.0};
  double angle = 0.0;
  Vec2 linear_velocity{0.0, 0.0};
  double angular_velocity = 0.0;
  double mass = 0.0;  // 0 => static
  double inertia = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
  Polygon shape;
  double friction = 2.5;
  // per-step accumulators, cleared after integration
  Vec2 force{0.0, 0.0};
  double torque = 0.0;
  int user_tag = 0;

  bool is_static() const { return inv_mass == 0.0 && inv_inertia == 0.0; }
  void set_mass(double m, double moment) {
    mass = m;
    inertia = moment;
    inv_mass = m > 0.0 ? 1.0 / m : 0.0;
    inv_inertia = moment > 0.0 ? 1.0 / moment : 0.0;
  }
  Vec2 to_world(const Vec2& local) const { return position + rotate(local, angle); }
  Vec2 velocity_at(const Vec2& world_point) const {
    return linear_velocity + cross_sv(angular_velocity, world_point - position);
  }
};

// one-sided static collision segment (terrain); normal is the outward side
struct Segment {
  Vec2 a, b;
  double friction = 2.5;

  Vec2 normal() const {
    Vec2 d = b - a;
    double len = d.norm();
    return Vec2(-d.y() / len, d.x() / len);  // left of a->b
  }
};

struct RevoluteJoint {
  int parent = -1;
  int child = -1;
  Vec2 anchor_parent{0.0, 0.0};  // body frames
  Vec2 anchor_child{0.0, 0.0};
  double reference_angle = 0.0;  // child.angle - parent.angle at joint angle zero
  // mirrored joints measure the angle with the opposite sense, so one set of
  // limits and commands serves both left- and right-handed leg geometry
  bool mirror = false;
  double angle_lo = -1e9, angle_hi = 1e9;
  double vel_lo = -1e9, vel_hi = 1e9;
  double motor_torque = 0.0;
  double effective_inertia = 1.0;  // child link inertia about the joint axis
  // solver scratch, warm-started across steps
  double limit_impulse = 0.0;
  Vec2 point_impulse{0.0, 0.0};

  double sense() const { return mirror ? -1.0 : 1.0; }
};

struct ContactPoint {
  int body = -1;
  int segment = -1;
  Vec2 point{0.0, 0.0};
  Vec2 normal{0.0, 1.0};  // pushes the body out of the terrain
  double penetration = 0.0;
  double normal_impulse = 0.0;
  double tangent_impulse = 0.0;
  double friction = 0.0;
};

}  // namespace ql::phys
