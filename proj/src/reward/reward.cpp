#include "reward/reward.hpp"

#include <cmath>

namespace ql::reward {

Coefficients drs_coefficients(const std::array<int, 4>& contact_bitmap, const RewardConfig& cfg) {
  Coefficients out;
  for (int leg = 0; leg < 4; ++leg) {
    const bool contact = cfg.mode == Mode::drs ? contact_bitmap[leg] != 0 : true;
    const double k1 = contact ? cfg.k1_contact : cfg.k1_swing;
    const double k2 = contact ? cfg.k2_contact : cfg.k2_swing;
    out.k1[2 * leg] = out.k1[2 * leg + 1] = k1;
    out.k2[2 * leg] = out.k2[2 * leg + 1] = k2;
  }
  return out;
}

RewardBreakdown compute_reward(double vx, double vy, const std::array<double, 8>& torques,
                               const std::array<double, 8>& joint_accels,
                               const std::array<int, 4>& contact_bitmap, bool fell,
                               const RewardConfig& cfg) {
  RewardBreakdown rb;
  rb.fell = fell;
  if (fell) {
    rb.total = cfg.p_fall;
    return rb;
  }
  const double dx = vx - cfg.v_star_x;
  double bracket = cfg.c2 - cfg.c3 * dx * dx;
  if (cfg.mode == Mode::static_2d_target) {
    const double dy = vy - cfg.v_star_y;
    bracket -= cfg.c3 * dy * dy;
  }
  rb.velocity_term = cfg.c1 * bracket;

  const Coefficients k = drs_coefficients(contact_bitmap, cfg);
  for (int j = 0; j < 8; ++j) {
    rb.torque_penalty += k.k1[j] * std::abs(torques[j]);
    const double w = k.k2[j] * joint_accels[j];
    rb.accel_penalty += w * w;
  }
  const double sign = cfg.penalties_subtract ? -1.0 : 1.0;
  rb.total = rb.velocity_term + sign * (rb.torque_penalty + rb.accel_penalty);
  if (!cfg.penalties_subtract) {
    // literal-equation mode: the breakdown still reports penalty magnitudes
    rb.torque_penalty = -rb.torque_penalty;
    rb.accel_penalty = -rb.accel_penalty;
  }
  return rb;
}

RewardBreakdown reward_for_step(const ControlStepInputs& in, const RewardConfig& cfg) {
  if (cfg.mode == Mode::baseline) {
    RewardBreakdown rb;
    rb.fell = in.fell;
    if (in.fell) {
      rb.total = cfg.baseline_p_fall;
      return rb;
    }
    rb.velocity_term = cfg.baseline_progress_scale * in.progress_dx;
    for (int j = 0; j < 8; ++j) rb.torque_penalty += cfg.baseline_torque_cost * std::abs(in.mean_abs_torque[j]);
    rb.total = rb.velocity_term - rb.torque_penalty;
    return rb;
  }
  std::array<double, 8> accels{};
  for (int j = 0; j < 8; ++j) {
    accels[j] = (in.q_dot_new[j] - in.q_dot_prev[j]) / in.dt_control;
  }
  return compute_reward(in.vx, in.vy, in.mean_abs_torque, accels, in.contact_bitmap, in.fell, cfg);
}

}  // namespace ql::reward
