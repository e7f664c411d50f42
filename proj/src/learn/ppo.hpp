#pragma once

#include "learn/mlp.hpp"

namespace ql::learn {

struct PpoConfig {
  double lr = 5e-5;
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.3;
  double vf_clip = 10.0;
  double vf_coeff = 0.62;
  double entropy_coeff = 0.00045;
  double kl_coeff = 1.0;
  double kl_target = 0.01;
  int minibatch = 20;
  int sgd_iters = 20;
};

// Separate policy and value networks plus a state-independent log-std action
// head. The flat view [policy | log_std | value] is what the optimizer and
// gradient checks see.
struct ActorCritic {
  Mlp policy;
  VectorXd log_std;
  Mlp value;

  static ActorCritic init(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng,
                          double initial_log_std);

  int act_dim() const { return policy.output_dim(); }
  int param_count() const {
    return static_cast<int>(policy.params().size() + log_std.size() + value.params().size());
  }
  VectorXd flat() const;
  void set_flat(const VectorXd& theta);
};

double gaussian_log_prob(const Eigen::Ref<const VectorXd>& action,
                         const Eigen::Ref<const VectorXd>& mean, const VectorXd& log_std);
double gaussian_entropy(const VectorXd& log_std);

struct ActionSample {
  VectorXd action;
  double log_prob = 0.0;
  double value = 0.0;
  VectorXd mean;
};
ActionSample sample_action(const ActorCritic& ac, const VectorXd& obs, Rng& rng,
                           bool deterministic = false);

struct Batch {
  MatrixXd obs;        // N x obs_dim
  MatrixXd actions;    // N x act_dim
  MatrixXd old_means;  // N x act_dim (policy output at collection time)
  VectorXd old_log_std;
  VectorXd old_log_prob;
  VectorXd old_values;
  VectorXd advantages;
  VectorXd returns;

  long size() const { return obs.rows(); }
  Batch rows(const std::vector<int>& idx) const;
};

struct LossStats {
  double total = 0.0;
  double policy_loss = 0.0;
  double vf_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
};

// Minimization-form PPO loss (clipped surrogate + clipped value loss +
// entropy bonus + adaptive KL penalty). When grad is non-null it receives the
// flat gradient in ActorCritic layout.
LossStats ppo_loss(const ActorCritic& ac, const Batch& batch, const PpoConfig& cfg,
                   double kl_coeff, VectorXd* grad);

struct UpdateStats {
  double policy_loss = 0.0;
  double vf_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double kl_coeff = 0.0;
  bool aborted = false;
};

// In-place minibatch SGD epochs; advantages are normalized here. On a
// non-finite loss the parameters are rolled back and `aborted` is set.
UpdateStats ppo_update(ActorCritic& ac, Batch& batch, const PpoConfig& cfg, double& kl_coeff,
                       Adam& adam, Rng& rng);

}  // namespace ql::learn
