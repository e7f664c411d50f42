#include "sensing/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "physics/collide.hpp"

namespace ql::sense {

LidarConfig LidarConfig::fan(double lo_deg, double hi_deg) {
  LidarConfig cfg;
  for (int i = 0; i < kLidarRays; ++i) {
    const double t = static_cast<double>(i) / (kLidarRays - 1);
    cfg.angles[i] = (lo_deg + t * (hi_deg - lo_deg)) * M_PI / 180.0;
  }
  return cfg;
}

bool LidarConfig::valid() const {
  for (int i = 1; i < kLidarRays; ++i) {
    if (angles[i] <= angles[i - 1]) return false;
  }
  return max_range > 0.0;
}

std::array<double, kLidarRays> lidar_scan(const std::vector<phys::Segment>& segments,
                                          const Vec2& hull_position, double hull_angle,
                                          const LidarConfig& config) {
  std::array<double, kLidarRays> out{};
  const Vec2 origin = hull_position + phys::rotate(config.origin_offset, hull_angle);
  for (int i = 0; i < kLidarRays; ++i) {
    const double a = hull_angle + config.angles[i];
    const Vec2 dir(std::cos(a), std::sin(a));
    double best = config.max_range;
    for (const phys::Segment& s : segments) {
      if (auto t = phys::ray_segment(origin, dir, s); t && *t < best) best = *t;
    }
    out[i] = best / config.max_range;
  }
  return out;
}

Observation44 assemble_observation(const BodyState& body, const JointState8& joints,
                                   const std::array<int, 4>& contacts,
                                   const std::array<double, kLidarRays>& lidar,
                                   const quad::RobotBlueprint& bp) {
  Observation44 obs{};
  obs[0] = body.angle;
  obs[1] = body.angular_velocity;
  obs[2] = body.vx;
  obs[3] = body.vy;
  for (int j = 0; j < 8; ++j) {
    const bool hip = j % 2 == 0;
    const double lo = hip ? bp.hip_lo : bp.knee_lo;
    const double hi = hip ? bp.hip_hi : bp.knee_hi;
    const double vlim = hip ? bp.hip_vel_limit : bp.knee_vel_limit;
    obs[4 + 2 * j] = 2.0 * (joints.q[j] - lo) / (hi - lo) - 1.0;
    obs[4 + 2 * j + 1] = joints.q_dot[j] / vlim;
  }
  for (int i = 0; i < 4; ++i) obs[20 + i] = static_cast<double>(contacts[i]);
  for (int i = 0; i < kLidarRays; ++i) obs[24 + i] = lidar[i];
  for (double v : obs) {
    if (!std::isfinite(v)) throw std::runtime_error("non-finite observation");
  }
  return obs;
}

Unpacked unpack_observation(const Observation44& obs, const quad::RobotBlueprint& bp) {
  Unpacked u;
  u.body.angle = obs[0];
  u.body.angular_velocity = obs[1];
  u.body.vx = obs[2];
  u.body.vy = obs[3];
  for (int j = 0; j < 8; ++j) {
    const bool hip = j % 2 == 0;
    const double lo = hip ? bp.hip_lo : bp.knee_lo;
    const double hi = hip ? bp.hip_hi : bp.knee_hi;
    const double vlim = hip ? bp.hip_vel_limit : bp.knee_vel_limit;
    u.joints.q[j] = lo + (obs[4 + 2 * j] + 1.0) / 2.0 * (hi - lo);
    u.joints.q_dot[j] = obs[4 + 2 * j + 1] * vlim;
  }
  for (int i = 0; i < 4; ++i) u.contacts[i] = obs[20 + i] > 0.5 ? 1 : 0;
  for (int i = 0; i < kLidarRays; ++i) u.lidar[i] = obs[24 + i];
  return u;
}

}  // namespace ql::sense
