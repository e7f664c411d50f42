#pragma once

#include <array>

namespace ql::reward {

enum class Mode { static_target, static_2d_target, drs, baseline };

struct RewardConfig {
  Mode mode = Mode::drs;
  double p_fall = -300.0;
  double v_star_x = 4.0;
  double v_star_y = 0.0;  // static_2d_target only
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 0.5;
  // (contact, swing) coefficient pairs, shared by both joints of a leg
  double k1_contact = 0.00096;  // c4
  double k1_swing = 0.00024;    // c5
  double k2_contact = 0.0024;   // c6
  double k2_swing = 0.0012;     // c7
  // subtract the torque/acceleration terms (penalty reading); false adds them
  // as literally printed
  bool penalties_subtract = true;
  // baseline-mode (original shaping reconstruction) constants
  double baseline_progress_scale = 4.0;
  double baseline_torque_cost = 0.001;
  double baseline_p_fall = -100.0;
};

struct RewardBreakdown {
  double total = 0.0;
  double velocity_term = 0.0;
  double torque_penalty = 0.0;
  double accel_penalty = 0.0;
  bool fell = false;
};

// Per-joint coefficient vectors from the 4-bit contact state; both joints of
// leg i share the leg's coefficients. Non-DRS modes use the contact-phase
// constants everywhere.
struct Coefficients {
  std::array<double, 8> k1{};
  std::array<double, 8> k2{};
};
Coefficients drs_coefficients(const std::array<int, 4>& contact_bitmap, const RewardConfig& cfg);

RewardBreakdown compute_reward(double vx, double vy, const std::array<double, 8>& torques,
                               const std::array<double, 8>& joint_accels,
                               const std::array<int, 4>& contact_bitmap, bool fell,
                               const RewardConfig& cfg);

// Per-control-step aggregation: joint accelerations finite-differenced from
// consecutive control-step joint velocities, torques averaged (absolute) over
// the physics substeps.
struct ControlStepInputs {
  double vx = 0.0, vy = 0.0;
  double progress_dx = 0.0;  // baseline mode
  std::array<double, 8> q_dot_prev{};
  std::array<double, 8> q_dot_new{};
  std::array<double, 8> mean_abs_torque{};
  std::array<int, 4> contact_bitmap{};
  bool fell = false;
  double dt_control = 0.04;
};
RewardBreakdown reward_for_step(const ControlStepInputs& in, const RewardConfig& cfg);

}  // namespace ql::reward
