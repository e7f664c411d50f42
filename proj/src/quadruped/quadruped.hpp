#pragma once

#include <array>
#include <string>
#include <vector>

#include "physics/world.hpp"

namespace ql::quad {

using phys::Vec2;

struct RobotBlueprint {
  double body_length = 9.1;
  double body_height = 1.6;
  double body_mass = 11.47;
  double upper_leg_length = 2.6;
  double upper_leg_width = 0.8;
  double upper_leg_mass = 0.30;
  double lower_leg_length = 2.3;
  double lower_leg_width = 0.64;
  double lower_leg_mass = 0.24;
  double hip_lo = -1.1, hip_hi = 1.1;
  double knee_lo = -1.6, knee_hi = -0.1;
  double hip_vel_limit = 4.0;
  double knee_vel_limit = 6.0;
  double friction = 2.5;
  double torque_max = 80.0;
  // hip stations along the hull (two legs attach at each), body frame
  double hip_attach_x_fraction = 0.25;  // +- body_length * fraction

  double total_mass() const {
    return body_mass + 4.0 * (upper_leg_mass + lower_leg_mass);
  }
  double leg_length() const { return upper_leg_length + lower_leg_length; }
  // geometry warnings for off-default configurations
  std::vector<std::string> validate() const;
};

struct PDGains {
  double kp_hip = 100.0;
  double kd_hip = 2.0;
  double kp_knee = 100.0;
  double kd_knee = 1.0;
};

// desired joint positions [hip0, knee0, hip1, knee1, hip2, knee2, hip3, knee3],
// clamped to the joint angle limits on ingestion
struct JointCommand8 {
  std::array<double, 8> q_des{};
};

struct Robot {
  int hull = -1;
  std::array<std::array<int, 2>, 4> legs{};  // [leg][0]=upper body id, [1]=lower
  std::array<int, 8> joints{};               // [hip0, knee0, ...]
  RobotBlueprint blueprint;

  bool is_hip(int joint_index) const { return joint_index % 2 == 0; }
  bool is_lower_leg_body(int body_id) const {
    for (const auto& leg : legs) {
      if (leg[1] == body_id) return true;
    }
    return false;
  }
  bool is_hull_body(int body_id) const { return body_id == hull; }
};

// hull-center height above flat ground for the default standing pose
double standing_hull_height(const RobotBlueprint& bp);

// default pose: hips at mid-range (0), knees at mid-range
std::array<double, 8> default_pose(const RobotBlueprint& bp);

// Registers 9 bodies and 8 revolute joints. spawn_x/spawn_y locate the hull
// center. Throws std::invalid_argument("invalid spawn") when the hull starts
// below the ground line at spawn_x.
Robot build_robot(phys::World& world, const RobotBlueprint& bp, double spawn_x, double spawn_y,
                  double ground_height_at_spawn);

// tau = kp (q_des - q) - kd q_dot, clamped to |tau| <= tau_max
double pd_torque(double q_des, double q, double q_dot, double kp, double kd, double tau_max);

// bit i set iff lower leg i touches terrain
std::array<int, 4> contact_bitmap(const Robot& robot, const std::vector<phys::ContactPoint>& contacts);

}  // namespace ql::quad
