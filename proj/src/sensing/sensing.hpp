#pragma once

#include <array>

#include "physics/types.hpp"
#include "quadruped/quadruped.hpp"

namespace ql::sense {

using phys::Vec2;

inline constexpr int kLidarRays = 20;
inline constexpr int kObservationDim = 44;

struct LidarConfig {
  Vec2 origin_offset{4.0, 0.0};  // hull frame
  std::array<double, kLidarRays> angles{};  // hull frame, 0 = forward horizontal
  double max_range = 18.0;

  // rays fanned forward-downward, evenly spaced over [lo_deg, hi_deg]
  static LidarConfig fan(double lo_deg = -85.0, double hi_deg = 5.0);
  bool valid() const;
};

using Observation44 = std::array<double, kObservationDim>;

// Normalized readings min(hit, max_range)/max_range against the terrain
// segments only (the robot's own links are never hit).
std::array<double, kLidarRays> lidar_scan(const std::vector<phys::Segment>& segments,
                                          const Vec2& hull_position, double hull_angle,
                                          const LidarConfig& config);

struct BodyState {
  double angle = 0.0;
  double angular_velocity = 0.0;
  double vx = 0.0, vy = 0.0;  // world frame
};

struct JointState8 {
  std::array<double, 8> q{};
  std::array<double, 8> q_dot{};
};

// layout: [body 4 | joints 16 interleaved (q, q_dot) | contacts 4 | lidar 20];
// q normalized to [-1,1] over the angle limits, q_dot scaled by 1/velocity limit
Observation44 assemble_observation(const BodyState& body, const JointState8& joints,
                                   const std::array<int, 4>& contacts,
                                   const std::array<double, kLidarRays>& lidar,
                                   const quad::RobotBlueprint& bp);

struct Unpacked {
  BodyState body;
  JointState8 joints;
  std::array<int, 4> contacts{};
  std::array<double, kLidarRays> lidar{};
};

Unpacked unpack_observation(const Observation44& obs, const quad::RobotBlueprint& bp);

}  // namespace ql::sense
