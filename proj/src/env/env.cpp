#include "env/env.hpp"

#include <cmath>
#include <stdexcept>

#include "common/rng.hpp"

namespace ql::env {

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::running: return "running";
    case Outcome::success: return "success";
    case Outcome::fell: return "fell";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

Env::Env(const EnvConfig& cfg) : cfg_(cfg) {
  if (cfg_.physics_hz % cfg_.control_hz != 0) {
    throw std::invalid_argument("physics_hz must be divisible by control_hz");
  }
}

sense::Observation44 Env::reset(uint64_t seed) {
  profile_ = terrain::generate(seed, cfg_.terrain);
  world_ = std::make_unique<phys::World>(cfg_.world);
  terrain::add_to_world(profile_, *world_, cfg_.blueprint.friction);

  const double ground = terrain::height_at(profile_, cfg_.spawn_x).value_or(cfg_.terrain.base_height);
  const double spawn_y = ground + quad::standing_hull_height(cfg_.blueprint) + cfg_.spawn_clearance;
  robot_ = quad::build_robot(*world_, cfg_.blueprint, cfg_.spawn_x, spawn_y, ground);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  const double impulse = rng.uniform(-cfg_.spawn_push_range, cfg_.spawn_push_range);
  world_->body(robot_.hull).linear_velocity.x() += impulse / cfg_.blueprint.body_mass;

  outcome_ = Outcome::running;
  steps_ = 0;
  initialized_ = true;
  last_bitmap_ = quad::contact_bitmap(robot_, world_->detect_contacts());
  return observe();
}

quad::JointCommand8 Env::action_to_command(const std::array<double, 8>& action) const {
  quad::JointCommand8 cmd;
  for (int j = 0; j < 8; ++j) {
    const bool hip = j % 2 == 0;
    const double lo = hip ? cfg_.blueprint.hip_lo : cfg_.blueprint.knee_lo;
    const double hi = hip ? cfg_.blueprint.hip_hi : cfg_.blueprint.knee_hi;
    const double a = std::clamp(action[j], -1.0, 1.0);
    cmd.q_des[j] = lo + (a + 1.0) / 2.0 * (hi - lo);
  }
  return cmd;
}

std::array<double, 8> Env::joint_velocities() const {
  std::array<double, 8> out{};
  for (int j = 0; j < 8; ++j) out[j] = world_->joint_velocity(world_->joint(robot_.joints[j]));
  return out;
}

StepResult Env::step(const std::array<double, 8>& action) {
  if (!initialized_ || done()) throw std::runtime_error("episode finished");

  const quad::JointCommand8 cmd = action_to_command(action);
  const auto q_dot_prev = joint_velocities();
  const double x_prev = world_->body(robot_.hull).position.x();

  StepResult result;
  result.commanded_q = cmd.q_des;
  std::array<double, 8> abs_torque_sum{};
  bool fell = false;
  bool diverged = false;

  const int n = cfg_.substeps();
  for (int s = 0; s < n; ++s) {
    for (int j = 0; j < 8; ++j) {
      phys::RevoluteJoint& joint = world_->joint(robot_.joints[j]);
      const double q = world_->joint_angle(joint);
      const double q_dot = world_->joint_velocity(joint);
      const bool hip = j % 2 == 0;
      const double kp = hip ? cfg_.gains.kp_hip : cfg_.gains.kp_knee;
      const double kd = hip ? cfg_.gains.kd_hip : cfg_.gains.kd_knee;
      const double tau = quad::pd_torque(cmd.q_des[j], q, q_dot, kp, kd, cfg_.blueprint.torque_max);
      joint.motor_torque = tau;
      result.substep_torques[s][j] = tau;
      abs_torque_sum[j] += std::abs(tau);
    }
    try {
      const phys::StepOutput out = world_->step(cfg_.physics_dt());
      last_bitmap_ = quad::contact_bitmap(robot_, out.contacts);
      for (const phys::ContactPoint& cp : out.contacts) {
        if (cp.body == robot_.hull) fell = true;
      }
    } catch (const phys::SimulationDiverged&) {
      diverged = true;
      fell = true;
      break;
    }
  }

  const phys::Body& hull = world_->body(robot_.hull);
  steps_ += 1;
  if (fell) {
    outcome_ = Outcome::fell;
  } else if (hull.position.x() >= profile_.total_length) {
    outcome_ = Outcome::success;
  } else if (steps_ >= cfg_.max_control_steps) {
    outcome_ = Outcome::timeout;
  }

  reward::ControlStepInputs rin;
  rin.vx = diverged ? 0.0 : hull.linear_velocity.x();
  rin.vy = diverged ? 0.0 : hull.linear_velocity.y();
  rin.progress_dx = hull.position.x() - x_prev;
  rin.q_dot_prev = q_dot_prev;
  rin.q_dot_new = joint_velocities();
  for (int j = 0; j < 8; ++j) rin.mean_abs_torque[j] = abs_torque_sum[j] / n;
  rin.contact_bitmap = last_bitmap_;
  rin.fell = fell;
  rin.dt_control = cfg_.control_dt();
  result.breakdown = reward::reward_for_step(rin, cfg_.reward);

  result.reward = result.breakdown.total;
  result.outcome = outcome_;
  result.done = done();
  if (diverged) {
    result.observation.fill(0.0);  // world state is unusable; episode is over
  } else {
    result.observation = observe();
  }
  result.hull_position = hull.position;
  result.hull_angle = hull.angle;
  result.vx = rin.vx;
  result.vy = rin.vy;
  result.contact_bitmap = last_bitmap_;
  for (int j = 0; j < 8; ++j) {
    result.joint_angles[j] = world_->joint_angle(world_->joint(robot_.joints[j]));
  }
  return result;
}

sense::Observation44 Env::observe() const {
  const phys::Body& hull = world_->body(robot_.hull);
  sense::BodyState body;
  body.angle = hull.angle;
  body.angular_velocity = hull.angular_velocity;
  body.vx = hull.linear_velocity.x();
  body.vy = hull.linear_velocity.y();

  sense::JointState8 joints;
  for (int j = 0; j < 8; ++j) {
    const phys::RevoluteJoint& joint = world_->joint(robot_.joints[j]);
    joints.q[j] = std::clamp(world_->joint_angle(joint),
                             j % 2 == 0 ? cfg_.blueprint.hip_lo : cfg_.blueprint.knee_lo,
                             j % 2 == 0 ? cfg_.blueprint.hip_hi : cfg_.blueprint.knee_hi);
    joints.q_dot[j] = world_->joint_velocity(joint);
  }
  const auto lidar = sense::lidar_scan(world_->segments(), hull.position, hull.angle, cfg_.lidar);
  return sense::assemble_observation(body, joints, last_bitmap_, lidar, cfg_.blueprint);
}

}  // namespace ql::env
