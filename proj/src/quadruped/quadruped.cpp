#include "quadruped/quadruped.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ql::quad {

std::vector<std::string> RobotBlueprint::validate() const {
  std::vector<std::string> warnings;
  if (std::abs(leg_length() - 4.9) > 1e-9) {
    warnings.push_back("leg length " + std::to_string(leg_length()) + " differs from default 4.9 m");
  }
  if (std::abs(total_mass() - 13.63) > 1e-9) {
    warnings.push_back("total mass " + std::to_string(total_mass()) +
                       " differs from default 13.63 kg");
  }
  if (hip_lo >= hip_hi || knee_lo >= knee_hi) {
    warnings.push_back("degenerate joint limits");
  }
  return warnings;
}

std::array<double, 8> default_pose(const RobotBlueprint& bp) {
  const double hip0 = 0.5 * (bp.hip_lo + bp.hip_hi);
  const double knee0 = 0.5 * (bp.knee_lo + bp.knee_hi);
  return {hip0, knee0, hip0, knee0, hip0, knee0, hip0, knee0};
}

double standing_hull_height(const RobotBlueprint& bp) {
  const auto pose = default_pose(bp);
  const double alpha = pose[0], beta = pose[1];
  // vertical extent from hull center down to the foot tip
  return bp.body_height / 2.0 + bp.upper_leg_length * std::cos(alpha) +
         bp.lower_leg_length * std::cos(alpha + beta);
}

Robot build_robot(phys::World& world, const RobotBlueprint& bp, double spawn_x, double spawn_y,
                  double ground_height_at_spawn) {
  if (spawn_y - bp.body_height / 2.0 <= ground_height_at_spawn) {
    throw std::invalid_argument("invalid spawn");
  }

  Robot robot;
  robot.blueprint = bp;
  const auto pose = default_pose(bp);

  phys::Body hull;
  hull.shape = phys::Polygon::box(bp.body_length / 2.0, bp.body_height / 2.0);
  hull.set_mass(bp.body_mass, bp.body_mass * hull.shape.inertia_per_mass());
  hull.position = Vec2(spawn_x, spawn_y);
  hull.friction = bp.friction;
  hull.user_tag = 1;
  robot.hull = world.add_body(hull);

  const double hip_x = bp.body_length * bp.hip_attach_x_fraction;
  const std::array<double, 4> attach_x = {hip_x, hip_x, -hip_x, -hip_x};
  const double hip_y = -bp.body_height / 2.0;

  for (int leg = 0; leg < 4; ++leg) {
    // front legs are mirrored so the default stance splays outward and the
    // feet straddle the hull's centre of mass with a wide support base
    const bool mirrored = leg < 2;
    const double s = mirrored ? -1.0 : 1.0;
    const double alpha = s * pose[2 * leg];
    const double beta = s * pose[2 * leg + 1];
    const Vec2 hip_world = Vec2(spawn_x + attach_x[leg], spawn_y + hip_y);

    phys::Body upper;
    upper.shape = phys::Polygon::box(bp.upper_leg_width / 2.0, bp.upper_leg_length / 2.0);
    upper.set_mass(bp.upper_leg_mass, bp.upper_leg_mass * upper.shape.inertia_per_mass());
    upper.angle = alpha;
    upper.position = hip_world + phys::rotate(Vec2(0.0, -bp.upper_leg_length / 2.0), alpha);
    upper.friction = bp.friction;
    upper.user_tag = 2;
    const int upper_id = world.add_body(upper);

    const Vec2 knee_world = hip_world + phys::rotate(Vec2(0.0, -bp.upper_leg_length), alpha);

    phys::Body lower;
    lower.shape = phys::Polygon::box(bp.lower_leg_width / 2.0, bp.lower_leg_length / 2.0);
    lower.set_mass(bp.lower_leg_mass, bp.lower_leg_mass * lower.shape.inertia_per_mass());
    lower.angle = alpha + beta;
    lower.position = knee_world + phys::rotate(Vec2(0.0, -bp.lower_leg_length / 2.0), alpha + beta);
    lower.friction = bp.friction;
    lower.user_tag = 3;
    const int lower_id = world.add_body(lower);

    robot.legs[leg] = {upper_id, lower_id};

    phys::RevoluteJoint hip;
    hip.parent = robot.hull;
    hip.child = upper_id;
    hip.mirror = mirrored;
    hip.anchor_parent = Vec2(attach_x[leg], hip_y);
    hip.anchor_child = Vec2(0.0, bp.upper_leg_length / 2.0);
    hip.angle_lo = bp.hip_lo;
    hip.angle_hi = bp.hip_hi;
    hip.vel_lo = -bp.hip_vel_limit;
    hip.vel_hi = bp.hip_vel_limit;
    hip.effective_inertia = upper.inertia + bp.upper_leg_mass * std::pow(bp.upper_leg_length / 2.0, 2);
    robot.joints[2 * leg] = world.add_joint(hip);

    phys::RevoluteJoint knee;
    knee.parent = upper_id;
    knee.child = lower_id;
    knee.mirror = mirrored;
    knee.anchor_parent = Vec2(0.0, -bp.upper_leg_length / 2.0);
    knee.anchor_child = Vec2(0.0, bp.lower_leg_length / 2.0);
    knee.angle_lo = bp.knee_lo;
    knee.angle_hi = bp.knee_hi;
    knee.vel_lo = -bp.knee_vel_limit;
    knee.vel_hi = bp.knee_vel_limit;
    knee.effective_inertia = lower.inertia + bp.lower_leg_mass * std::pow(bp.lower_leg_length / 2.0, 2);
    robot.joints[2 * leg + 1] = world.add_joint(knee);
  }
  return robot;
}

double pd_torque(double q_des, double q, double q_dot, double kp, double kd, double tau_max) {
  const double tau = kp * (q_des - q) - kd * q_dot;
  return std::clamp(tau, -tau_max, tau_max);
}

std::array<int, 4> contact_bitmap(const Robot& robot, const std::vector<phys::ContactPoint>& contacts) {
  std::array<int, 4> bitmap{0, 0, 0, 0};
  for (const phys::ContactPoint& cp : contacts) {
    for (int leg = 0; leg < 4; ++leg) {
      if (cp.body == robot.legs[leg][1]) bitmap[leg] = 1;
    }
  }
  return bitmap;
}

}  // namespace ql::quad
