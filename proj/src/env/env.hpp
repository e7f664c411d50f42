#pragma once

#include <memory>
#include <optional>

#include "quadruped/quadruped.hpp"
#include "reward/reward.hpp"
#include "sensing/sensing.hpp"
#include "terrain/terrain.hpp"

namespace ql::env {

enum class Outcome { running, success, fell, timeout };

const char* outcome_name(Outcome o);

struct EnvConfig {
  int control_hz = 25;
  int physics_hz = 100;
  int max_control_steps = 2000;
  double spawn_push_range = 50.0;  // impulse magnitude, N*s
  double spawn_x = 5.0;
  double spawn_clearance = 0.15;
  terrain::Params terrain;
  reward::RewardConfig reward;
  quad::RobotBlueprint blueprint;
  quad::PDGains gains;
  sense::LidarConfig lidar = sense::LidarConfig::fan();
  phys::WorldConfig world;

  int substeps() const { return physics_hz / control_hz; }
  double control_dt() const { return 1.0 / control_hz; }
  double physics_dt() const { return 1.0 / physics_hz; }
};

struct StepResult {
  sense::Observation44 observation{};
  double reward = 0.0;
  bool done = false;
  Outcome outcome = Outcome::running;
  reward::RewardBreakdown breakdown;
  // info
  phys::Vec2 hull_position{0.0, 0.0};
  double hull_angle = 0.0;
  double vx = 0.0, vy = 0.0;
  std::array<int, 4> contact_bitmap{};
  std::array<double, 8> joint_angles{};
  std::array<double, 8> commanded_q{};
  std::array<std::array<double, 8>, 4> substep_torques{};
};

class Env {
 public:
  explicit Env(const EnvConfig& cfg);

  sense::Observation44 reset(uint64_t seed);
  // throws std::runtime_error("episode finished") when called after done
  StepResult step(const std::array<double, 8>& action);

  quad::JointCommand8 action_to_command(const std::array<double, 8>& action) const;

  bool done() const { return outcome_ != Outcome::running; }
  Outcome outcome() const { return outcome_; }
  int steps_taken() const { return steps_; }
  const terrain::Profile& profile() const { return profile_; }
  const EnvConfig& config() const { return cfg_; }
  const phys::World& world() const { return *world_; }

 private:
  sense::Observation44 observe() const;
  std::array<double, 8> joint_velocities() const;

  EnvConfig cfg_;
  std::unique_ptr<phys::World> world_;
  terrain::Profile profile_;
  quad::Robot robot_;
  Outcome outcome_ = Outcome::running;
  int steps_ = 0;
  bool initialized_ = false;
  std::array<int, 4> last_bitmap_{};
};

}  // namespace ql::env
