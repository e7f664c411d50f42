#pragma once

#include <functional>
#include <memory>
#include <string>

#include "env/env.hpp"
#include "learn/gae.hpp"
#include "learn/ppo.hpp"

namespace ql::learn {

struct TrainConfig {
  int iterations = 100;
  int num_envs = 4;
  int fragment_len = 200;
  int batch_size = 4000;
  int checkpoint_every = 10;
  uint64_t seed = 0;
  std::vector<int> hidden = {256, 256};
  double initial_log_std = std::log(0.5);
};

struct IterationLog {
  int iteration = 0;
  double mean_episode_reward = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double policy_loss = 0.0;
  double vf_loss = 0.0;
  double kl_coeff = 0.0;
  int episodes_completed = 0;
  double mean_episode_length = 0.0;
  bool aborted = false;
};

struct EpisodeResult {
  env::Outcome outcome = env::Outcome::running;
  double total_reward = 0.0;
  int steps = 0;
  double mean_vx = 0.0;
  double mean_vx_second_half = 0.0;
  double final_x = 0.0;
};

// One rollout with a fixed policy; deterministic=true uses the mean action.
EpisodeResult run_episode(env::Env& e, const ActorCritic& ac, uint64_t seed, bool deterministic,
                          Rng& rng);

class Trainer {
 public:
  Trainer(const env::EnvConfig& env_cfg, const PpoConfig& ppo_cfg, const TrainConfig& train_cfg,
          uint64_t config_hash = 0);

  using Callback = std::function<void(const IterationLog&)>;
  void run(int iterations, const Callback& cb = nullptr);

  ActorCritic& actor_critic() { return ac_; }
  const ActorCritic& actor_critic() const { return ac_; }
  int iteration() const { return iteration_; }
  uint64_t config_hash() const { return config_hash_; }

  void save_checkpoint(const std::string& path) const;
  // restores parameters, optimizer and RNG state; env/ppo/train configs must
  // come from the same run config (hash checked unless force)
  void load_checkpoint(const std::string& path, bool force = false);

 private:
  Batch collect_batch(IterationLog& log);

  env::EnvConfig env_cfg_;
  PpoConfig ppo_cfg_;
  TrainConfig train_cfg_;
  uint64_t config_hash_ = 0;

  ActorCritic ac_;
  Adam adam_;
  double kl_coeff_;
  Rng rng_;
  int iteration_ = 0;

  struct Worker {
    std::unique_ptr<env::Env> env;
    sense::Observation44 obs{};
    double episode_reward = 0.0;
    int episode_steps = 0;
    bool needs_reset = true;
  };
  std::vector<Worker> workers_;
};

// checkpoint inspection without constructing a trainer
struct CheckpointInfo {
  uint32_t version = 0;
  uint64_t config_hash = 0;
  int iteration = 0;
  std::vector<int> policy_sizes;
  std::vector<int> value_sizes;
  long param_count = 0;
  double kl_coeff = 0.0;
};
CheckpointInfo inspect_checkpoint(const std::string& path);

// standalone parameter load for evaluation/replay
struct LoadedPolicy {
  ActorCritic ac;
  CheckpointInfo info;
};
LoadedPolicy load_policy(const std::string& path);

}  // namespace ql::learn
