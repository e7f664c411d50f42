#pragma once

#include "physics/types.hpp"

namespace ql::phys {

// Algorithm: one explicit-Euler joint velocity update, clipped to the joint
// velocity limits. Pure.
double forward_dynamics_joint(double theta_dot_curr, double inertia, double torque, double dt,
                              double vel_lo, double vel_hi);

struct WorldConfig {
  Vec2 gravity{0.0, -9.8};
  int velocity_iterations = 8;
  double baumgarte = 0.2;
  double slop = 1e-3;
  double angle_limit_slop = 1e-3;
};

struct StepOutput {
  std::vector<ContactPoint> contacts;  // post-step contact set with impulses
};

class World {
 public:
  explicit World(const WorldConfig& cfg = {}) : cfg_(cfg) {}

  int add_body(Body b);
  int add_segment(Segment s);
  int add_joint(RevoluteJoint j);

  Body& body(int id) { return bodies_[id]; }
  const Body& body(int id) const { return bodies_[id]; }
  RevoluteJoint& joint(int id) { return joints_[id]; }
  const RevoluteJoint& joint(int id) const { return joints_[id]; }
  const std::vector<Body>& bodies() const { return bodies_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<RevoluteJoint>& joints() const { return joints_; }
  const WorldConfig& config() const { return cfg_; }

  double joint_angle(const RevoluteJoint& j) const {
    return j.sense() * (bodies_[j.child].angle - bodies_[j.parent].angle - j.reference_angle);
  }
  double joint_velocity(const RevoluteJoint& j) const {
    return j.sense() * (bodies_[j.child].angular_velocity - bodies_[j.parent].angular_velocity);
  }

  // Deterministic contact query against the current state, ordered by
  // (body id, segment id).
  std::vector<ContactPoint> detect_contacts() const;

  // One 100 Hz tick: motor torques, velocity integration, contact detection,
  // sequential-impulse solve, joint velocity clipping, position integration,
  // joint angle-limit projection. Throws SimulationDiverged on non-finite
  // state or runaway positions.
  StepOutput step(double dt);

 private:
  void check_finite() const;

  WorldConfig cfg_;
  std::vector<Body> bodies_;
  std::vector<Segment> segments_;
  std::vector<RevoluteJoint> joints_;
  std::vector<ContactPoint> warm_contacts_;  // previous step's solved impulses
};

}  // namespace ql::phys
