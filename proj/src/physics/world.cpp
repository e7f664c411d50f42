#include "physics/world.hpp"

#include <algorithm>
#include <cmath>

#include "physics/collide.hpp"

namespace ql::phys {

double Polygon::area() const {
  double a = 0.0;
  for (size_t i = 0; i < verts.size(); ++i) {
    a += cross2(verts[i], verts[(i + 1) % verts.size()]);
  }
  return 0.5 * a;
}

double Polygon::inertia_per_mass() const {
  // second moment of area about the centroid, divided by area
  double num = 0.0, a = 0.0;
  Vec2 c{0.0, 0.0};
  for (size_t i = 0; i < verts.size(); ++i) {
    const Vec2& p = verts[i];
    const Vec2& q = verts[(i + 1) % verts.size()];
    const double cr = cross2(p, q);
    num += cr * (p.dot(p) + p.dot(q) + q.dot(q));
    a += 0.5 * cr;
    c += cr / 6.0 * (p + q);
  }
  c /= a;
  return num / (12.0 * a) - c.dot(c);
}

bool Polygon::is_ccw_convex() const {
  const size_t n = verts.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 e0 = verts[(i + 1) % n] - verts[i];
    const Vec2 e1 = verts[(i + 2) % n] - verts[(i + 1) % n];
    if (cross2(e0, e1) <= 0.0) return false;
  }
  return true;
}

double forward_dynamics_joint(double theta_dot_curr, double inertia, double torque, double dt,
                              double vel_lo, double vel_hi) {
  if (!std::isfinite(theta_dot_curr) || !std::isfinite(inertia) || !std::isfinite(torque) ||
      !std::isfinite(dt)) {
    throw std::invalid_argument("non-finite dynamics input");
  }
  const double theta_dot_new = theta_dot_curr + torque / inertia * dt;
  return std::clamp(theta_dot_new, vel_lo, vel_hi);
}

int World::add_body(Body b) {
  bodies_.push_back(std::move(b));
  return static_cast<int>(bodies_.size()) - 1;
}

int World::add_segment(Segment s) {
  segments_.push_back(s);
  return static_cast<int>(segments_.size()) - 1;
}

int World::add_joint(RevoluteJoint j) {
  joints_.push_back(j);
  return static_cast<int>(joints_.size()) - 1;
}

std::vector<ContactPoint> World::detect_contacts() const {
  std::vector<ContactPoint> out;
  for (size_t bi = 0; bi < bodies_.size(); ++bi) {
    const Body& b = bodies_[bi];
    if (b.is_static()) continue;
    // body AABB
    Vec2 lo{1e30, 1e30}, hi{-1e30, -1e30};
    for (const Vec2& v : b.shape.verts) {
      const Vec2 w = b.to_world(v);
      lo = lo.cwiseMin(w);
      hi = hi.cwiseMax(w);
    }
    for (size_t si = 0; si < segments_.size(); ++si) {
      const Segment& s = segments_[si];
      if (std::max(s.a.x(), s.b.x()) < lo.x() || std::min(s.a.x(), s.b.x()) > hi.x() ||
          std::max(s.a.y(), s.b.y()) < lo.y() || std::min(s.a.y(), s.b.y()) > hi.y()) {
        continue;
      }
      auto cps = collide_polygon_segment(b, static_cast<int>(bi), s, static_cast<int>(si));
      out.insert(out.end(), cps.begin(), cps.end());
    }
  }
  return out;
}

namespace {

struct ContactState {
  ContactPoint cp;
  Vec2 r;  // contact point relative to body center
  Vec2 tangent;
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double bias = 0.0;
};

struct JointState {
  const RevoluteJoint* j;
  Vec2 rp, rc;            // world-frame anchor arms
  Eigen::Matrix2d k_inv;  // point-constraint effective mass inverse
  Vec2 bias{0.0, 0.0};
  Vec2 accum{0.0, 0.0};  // total point-constraint impulse this step
  double limit_mass = 0.0;
  double limit_bias = 0.0;
  int limit_side = 0;  // -1 lower active, +1 upper active, 0 inactive
  double limit_impulse = 0.0;
};

}  // namespace

StepOutput World::step(double dt) {
  // motor torques act on both connected bodies
  for (const RevoluteJoint& j : joints_) {
    bodies_[j.parent].torque -= j.sense() * j.motor_torque;
    bodies_[j.child].torque += j.sense() * j.motor_torque;
  }

  // integrate velocities
  for (Body& b : bodies_) {
    if (b.is_static()) continue;
    b.linear_velocity += dt * (cfg_.gravity + b.inv_mass * b.force);
    b.angular_velocity += dt * b.inv_inertia * b.torque;
    b.force.setZero();
    b.torque = 0.0;
  }

  std::vector<ContactPoint> raw = detect_contacts();

  std::vector<ContactState> contacts;
  contacts.reserve(raw.size());
  for (const ContactPoint& cp : raw) {
    const Body& b = bodies_[cp.body];
    ContactState cs;
    cs.cp = cp;
    cs.r = cp.point - b.position;
    cs.tangent = Vec2(-cp.normal.y(), cp.normal.x());
    const double rn = cross2(cs.r, cp.normal);
    const double rt = cross2(cs.r, cs.tangent);
    cs.normal_mass = 1.0 / (b.inv_mass + b.inv_inertia * rn * rn);
    cs.tangent_mass = 1.0 / (b.inv_mass + b.inv_inertia * rt * rt);
    cs.bias = 0.0;  // penetration is resolved positionally after integration

    // warm start from the nearest matching contact of the previous step
    const ContactPoint* match = nullptr;
    double best = 0.05 * 0.05;
    for (const ContactPoint& prev : warm_contacts_) {
      if (prev.body != cp.body || prev.segment != cp.segment) continue;
      const double d2 = (prev.point - cp.point).squaredNorm();
      if (d2 < best) {
        best = d2;
        match = &prev;
      }
    }
    if (match != nullptr) {
      cs.cp.normal_impulse = match->normal_impulse;
      cs.cp.tangent_impulse = match->tangent_impulse;
      Body& b = bodies_[cp.body];
      const Vec2 p = cs.cp.normal_impulse * cp.normal + cs.cp.tangent_impulse * cs.tangent;
      b.linear_velocity += b.inv_mass * p;
      b.angular_velocity += b.inv_inertia * cross2(cs.r, p);
    }
    contacts.push_back(cs);
  }

  std::vector<JointState> jstates;
  jstates.reserve(joints_.size());
  for (RevoluteJoint& j : joints_) {
    const Body& p = bodies_[j.parent];
    const Body& c = bodies_[j.child];
    JointState js;
    js.j = &j;
    js.rp = rotate(j.anchor_parent, p.angle);
    js.rc = rotate(j.anchor_child, c.angle);
    const double im = p.inv_mass + c.inv_mass;
    Eigen::Matrix2d k;
    k(0, 0) = im + p.inv_inertia * js.rp.y() * js.rp.y() + c.inv_inertia * js.rc.y() * js.rc.y();
    k(0, 1) = -p.inv_inertia * js.rp.x() * js.rp.y() - c.inv_inertia * js.rc.x() * js.rc.y();
    k(1, 0) = k(0, 1);
    k(1, 1) = im + p.inv_inertia * js.rp.x() * js.rp.x() + c.inv_inertia * js.rc.x() * js.rc.x();
    js.k_inv = k.inverse();
    const Vec2 position_error = (c.position + js.rc) - (p.position + js.rp);
    js.bias = cfg_.baumgarte / dt * position_error;

    const double ki = p.inv_inertia + c.inv_inertia;
    js.limit_mass = ki > 0.0 ? 1.0 / ki : 0.0;
    const double theta = joint_angle(j);
    if (theta <= j.angle_lo) {
      js.limit_side = -1;
      js.limit_bias = cfg_.baumgarte / dt * std::max(j.angle_lo - theta - cfg_.angle_limit_slop, 0.0);
    } else if (theta >= j.angle_hi) {
      js.limit_side = 1;
      js.limit_bias = -cfg_.baumgarte / dt * std::max(theta - j.angle_hi - cfg_.angle_limit_slop, 0.0);
    }

    // warm start from the previous step's solved impulses
    {
      Body& pb = bodies_[j.parent];
      Body& cb = bodies_[j.child];
      js.accum = j.point_impulse;
      cb.linear_velocity += cb.inv_mass * js.accum;
      cb.angular_velocity += cb.inv_inertia * cross2(js.rc, js.accum);
      pb.linear_velocity -= pb.inv_mass * js.accum;
      pb.angular_velocity -= pb.inv_inertia * cross2(js.rp, js.accum);
      if (js.limit_side != 0) {
        js.limit_impulse = j.limit_impulse;
        const double s = j.sense();
        cb.angular_velocity += cb.inv_inertia * s * js.limit_impulse;
        pb.angular_velocity -= pb.inv_inertia * s * js.limit_impulse;
      }
    }
    jstates.push_back(js);
  }

  for (int it = 0; it < cfg_.velocity_iterations; ++it) {
    // joint point constraints
    for (JointState& js : jstates) {
      Body& p = bodies_[js.j->parent];
      Body& c = bodies_[js.j->child];
      const Vec2 vrel = (c.linear_velocity + cross_sv(c.angular_velocity, js.rc)) -
                        (p.linear_velocity + cross_sv(p.angular_velocity, js.rp));
      const Vec2 impulse = js.k_inv * (-(vrel + js.bias));
      js.accum += impulse;
      c.linear_velocity += c.inv_mass * impulse;
      c.angular_velocity += c.inv_inertia * cross2(js.rc, impulse);
      p.linear_velocity -= p.inv_mass * impulse;
      p.angular_velocity -= p.inv_inertia * cross2(js.rp, impulse);
    }

    // joint angle limits
    for (JointState& js : jstates) {
      if (js.limit_side == 0) continue;
      Body& p = bodies_[js.j->parent];
      Body& c = bodies_[js.j->child];
      const double s = js.j->sense();
      const double theta_dot = s * (c.angular_velocity - p.angular_velocity);
      double d_impulse = js.limit_mass * (js.limit_bias - theta_dot);
      const double old = js.limit_impulse;
      if (js.limit_side < 0) {
        js.limit_impulse = std::max(old + d_impulse, 0.0);
      } else {
        js.limit_impulse = std::min(old + d_impulse, 0.0);
      }
      d_impulse = js.limit_impulse - old;
      c.angular_velocity += c.inv_inertia * s * d_impulse;
      p.angular_velocity -= p.inv_inertia * s * d_impulse;
    }

    // contacts: normal then friction
    for (ContactState& cs : contacts) {
      Body& b = bodies_[cs.cp.body];
      const Vec2 v = b.linear_velocity + cross_sv(b.angular_velocity, cs.r);
      const double vn = v.dot(cs.cp.normal);
      double dn = cs.normal_mass * (cs.bias - vn);
      const double old_n = cs.cp.normal_impulse;
      cs.cp.normal_impulse = std::max(old_n + dn, 0.0);
      dn = cs.cp.normal_impulse - old_n;
      const Vec2 pn = dn * cs.cp.normal;
      b.linear_velocity += b.inv_mass * pn;
      b.angular_velocity += b.inv_inertia * cross2(cs.r, pn);

      const Vec2 v2 = b.linear_velocity + cross_sv(b.angular_velocity, cs.r);
      const double vt = v2.dot(cs.tangent);
      double dtangent = cs.tangent_mass * (-vt);
      const double max_t = cs.cp.friction * cs.cp.normal_impulse;
      const double old_t = cs.cp.tangent_impulse;
      cs.cp.tangent_impulse = std::clamp(old_t + dtangent, -max_t, max_t);
      dtangent = cs.cp.tangent_impulse - old_t;
      const Vec2 pt = dtangent * cs.tangent;
      b.linear_velocity += b.inv_mass * pt;
      b.angular_velocity += b.inv_inertia * cross2(cs.r, pt);
    }
  }

  // keep solved impulses for next step's warm start
  for (const JointState& js : jstates) {
    RevoluteJoint& j = joints_[js.j - joints_.data()];
    j.point_impulse = js.accum;
    j.limit_impulse = js.limit_side != 0 ? js.limit_impulse : 0.0;
  }
  warm_contacts_.clear();
  for (const ContactState& cs : contacts) warm_contacts_.push_back(cs.cp);

  // hard joint velocity clipping, child side adjusted
  for (const RevoluteJoint& j : joints_) {
    Body& p = bodies_[j.parent];
    Body& c = bodies_[j.child];
    const double theta_dot = j.sense() * (c.angular_velocity - p.angular_velocity);
    const double clipped = std::clamp(theta_dot, j.vel_lo, j.vel_hi);
    c.angular_velocity = p.angular_velocity + j.sense() * clipped;
  }

  // integrate positions
  for (Body& b : bodies_) {
    if (b.is_static()) continue;
    b.position += dt * b.linear_velocity;
    b.angle += dt * b.angular_velocity;
  }

  // contact position correction: push bodies out of the terrain without
  // injecting kinetic energy (the velocity solve runs bias-free)
  for (int it = 0; it < 3; ++it) {
    bool any = false;
    for (const ContactPoint& cp : detect_contacts()) {
      const double c = cfg_.baumgarte * std::max(cp.penetration - cfg_.slop, 0.0);
      if (c <= 0.0) continue;
      any = true;
      Body& b = bodies_[cp.body];
      const Vec2 r = cp.point - b.position;
      const double rn = cross2(r, cp.normal);
      const double pos_mass = 1.0 / (b.inv_mass + b.inv_inertia * rn * rn);
      const double p = pos_mass * c;
      b.position += b.inv_mass * p * cp.normal;
      b.angle += b.inv_inertia * rn * p;
    }
    if (!any) break;
  }

  // angle-limit projection: rotate the child about its own joint anchor
  for (const RevoluteJoint& j : joints_) {
    const double theta = joint_angle(j);
    double delta = 0.0;
    if (theta < j.angle_lo) delta = j.angle_lo - theta;
    if (theta > j.angle_hi) delta = j.angle_hi - theta;
    if (delta == 0.0) continue;
    Body& c = bodies_[j.child];
    const Vec2 pivot = c.to_world(j.anchor_child);
    const double link_delta = j.sense() * delta;
    c.angle += link_delta;
    c.position = pivot + rotate(c.position - pivot, link_delta);
  }

  check_finite();

  StepOutput out;
  // the post-step contact set, with impulses carried over from the solve
  out.contacts = detect_contacts();
  for (ContactPoint& cp : out.contacts) {
    double best = 1e30;
    for (const ContactState& cs : contacts) {
      if (cs.cp.body != cp.body || cs.cp.segment != cp.segment) continue;
      const double d2 = (cs.cp.point - cp.point).squaredNorm();
      if (d2 < best) {
        best = d2;
        cp.normal_impulse = cs.cp.normal_impulse;
        cp.tangent_impulse = cs.cp.tangent_impulse;
      }
    }
  }
  return out;
}

void World::check_finite() const {
  for (const Body& b : bodies_) {
    const bool finite = b.position.allFinite() && std::isfinite(b.angle) &&
                        b.linear_velocity.allFinite() && std::isfinite(b.angular_velocity);
    if (!finite || b.position.cwiseAbs().maxCoeff() > 1e4) {
      throw SimulationDiverged("simulation diverged");
    }
  }
}

}  // namespace ql::phys
