#include "learn/ppo.hpp"

#include <cmath>

namespace ql::learn {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

ActorCritic ActorCritic::init(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& rng,
                              double initial_log_std) {
  std::vector<int> psizes = {obs_dim};
  psizes.insert(psizes.end(), hidden.begin(), hidden.end());
  psizes.push_back(act_dim);
  std::vector<int> vsizes = {obs_dim};
  vsizes.insert(vsizes.end(), hidden.begin(), hidden.end());
  vsizes.push_back(1);

  ActorCritic ac;
  ac.policy = Mlp::init(psizes, rng, 0.01);
  ac.log_std = VectorXd::Constant(act_dim, initial_log_std);
  ac.value = Mlp::init(vsizes, rng, 1.0);
  return ac;
}

VectorXd ActorCritic::flat() const {
  VectorXd theta(param_count());
  theta << policy.params(), log_std, value.params();
  return theta;
}

void ActorCritic::set_flat(const VectorXd& theta) {
  const long np = policy.params().size();
  const long na = log_std.size();
  policy.params() = theta.segment(0, np);
  log_std = theta.segment(np, na);
  value.params() = theta.segment(np + na, value.params().size());
}

double gaussian_log_prob(const Eigen::Ref<const VectorXd>& action,
                         const Eigen::Ref<const VectorXd>& mean, const VectorXd& log_std) {
  const long d = action.size();
  double lp = -0.5 * d * kLog2Pi;
  for (long j = 0; j < d; ++j) {
    const double z = (action[j] - mean[j]) * std::exp(-log_std[j]);
    lp -= 0.5 * z * z + log_std[j];
  }
  return lp;
}

double gaussian_entropy(const VectorXd& log_std) {
  return log_std.sum() + 0.5 * log_std.size() * (kLog2Pi + 1.0);
}

ActionSample sample_action(const ActorCritic& ac, const VectorXd& obs, Rng& rng,
                           bool deterministic) {
  ActionSample s;
  s.mean = ac.policy.forward(obs.transpose()).row(0);
  s.value = ac.value.forward(obs.transpose())(0, 0);
  if (deterministic) {
    s.action = s.mean;
  } else {
    s.action = s.mean;
    for (long j = 0; j < s.action.size(); ++j) {
      s.action[j] += std::exp(ac.log_std[j]) * rng.normal();
    }
  }
  s.log_prob = gaussian_log_prob(s.action, s.mean, ac.log_std);
  return s;
}

Batch Batch::rows(const std::vector<int>& idx) const {
  Batch b;
  const long n = static_cast<long>(idx.size());
  b.obs.resize(n, obs.cols());
  b.actions.resize(n, actions.cols());
  b.old_means.resize(n, old_means.cols());
  b.old_log_prob.resize(n);
  b.old_values.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  b.old_log_std = old_log_std;
  for (long i = 0; i < n; ++i) {
    b.obs.row(i) = obs.row(idx[i]);
    b.actions.row(i) = actions.row(idx[i]);
    b.old_means.row(i) = old_means.row(idx[i]);
    b.old_log_prob[i] = old_log_prob[idx[i]];
    b.old_values[i] = old_values[idx[i]];
    b.advantages[i] = advantages[idx[i]];
    b.returns[i] = returns[idx[i]];
  }
  return b;
}

LossStats ppo_loss(const ActorCritic& ac, const Batch& batch, const PpoConfig& cfg,
                   double kl_coeff, VectorXd* grad) {
  const long n = batch.size();
  const long d = ac.act_dim();
  const double inv_n = 1.0 / static_cast<double>(n);

  Mlp::Cache pcache, vcache;
  const MatrixXd means = ac.policy.forward(batch.obs, grad ? &pcache : nullptr);
  const MatrixXd values = ac.value.forward(batch.obs, grad ? &vcache : nullptr);

  const VectorXd sigma = ac.log_std.array().exp();
  const VectorXd inv_var = (-2.0 * ac.log_std.array()).exp();
  const VectorXd old_var = (2.0 * batch.old_log_std.array()).exp();

  LossStats stats;
  MatrixXd d_means = MatrixXd::Zero(n, d);
  VectorXd d_log_std = VectorXd::Zero(d);
  VectorXd d_values = VectorXd::Zero(n);

  double surr_sum = 0.0, kl_sum = 0.0, vf_sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const double lp_new = gaussian_log_prob(batch.actions.row(i).transpose(),
                                            means.row(i).transpose(), ac.log_std);
    const double rho = std::exp(lp_new - batch.old_log_prob[i]);
    const double adv = batch.advantages[i];
    const double rho_clip = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double unclipped = rho * adv;
    const double clipped = rho_clip * adv;
    surr_sum += std::min(unclipped, clipped);
    double d_surr_d_rho = 0.0;
    if (unclipped <= clipped || (rho >= 1.0 - cfg.clip && rho <= 1.0 + cfg.clip)) {
      d_surr_d_rho = adv;
    }
    const double d_loss_d_lp = -inv_n * d_surr_d_rho * rho;  // minimize -surrogate

    // KL(old || new), diagonal Gaussians
    double kl_i = 0.0;
    for (long j = 0; j < d; ++j) {
      const double dmu = batch.old_means(i, j) - means(i, j);
      kl_i += ac.log_std[j] - batch.old_log_std[j] +
              0.5 * (old_var[j] + dmu * dmu) * inv_var[j] - 0.5;
    }
    kl_sum += kl_i;

    for (long j = 0; j < d; ++j) {
      const double diff = batch.actions(i, j) - means(i, j);
      // surrogate through log-prob
      d_means(i, j) += d_loss_d_lp * diff * inv_var[j];
      d_log_std[j] += d_loss_d_lp * (diff * diff * inv_var[j] - 1.0);
      // KL penalty
      const double dmu = means(i, j) - batch.old_means(i, j);
      d_means(i, j) += kl_coeff * inv_n * dmu * inv_var[j];
      d_log_std[j] += kl_coeff * inv_n *
                      (1.0 - (old_var[j] + dmu * dmu) * inv_var[j]);
    }

    // clipped value loss
    const double v = values(i, 0);
    const double vc = batch.old_values[i] +
                      std::clamp(v - batch.old_values[i], -cfg.vf_clip, cfg.vf_clip);
    const double e1 = v - batch.returns[i];
    const double e2 = vc - batch.returns[i];
    if (e1 * e1 >= e2 * e2) {
      vf_sum += e1 * e1;
      d_values[i] = cfg.vf_coeff * inv_n * 2.0 * e1;
    } else {
      vf_sum += e2 * e2;
      const bool pass = std::abs(v - batch.old_values[i]) < cfg.vf_clip;
      d_values[i] = pass ? cfg.vf_coeff * inv_n * 2.0 * e2 : 0.0;
    }
  }

  stats.policy_loss = -surr_sum * inv_n;
  stats.vf_loss = vf_sum * inv_n;
  stats.entropy = gaussian_entropy(ac.log_std);
  stats.kl = kl_sum * inv_n;
  stats.total = stats.policy_loss + cfg.vf_coeff * stats.vf_loss -
                cfg.entropy_coeff * stats.entropy + kl_coeff * stats.kl;

  if (grad) {
    d_log_std.array() -= cfg.entropy_coeff;  // d(-entropy_coeff * entropy)/dlog_std
    const VectorXd gp = ac.policy.backward(pcache, d_means);
    const VectorXd gv = ac.value.backward(vcache, d_values);
    grad->resize(ac.param_count());
    *grad << gp, d_log_std, gv;
  }
  return stats;
}

UpdateStats ppo_update(ActorCritic& ac, Batch& batch, const PpoConfig& cfg, double& kl_coeff,
                       Adam& adam, Rng& rng) {
  // per-batch advantage normalization
  const double mean = batch.advantages.mean();
  const double sd = std::sqrt((batch.advantages.array() - mean).square().sum() /
                              std::max<long>(batch.size() - 1, 1));
  batch.advantages = (batch.advantages.array() - mean) / (sd > 1e-8 ? sd : 1.0);

  const VectorXd snapshot = ac.flat();
  const Adam adam_snapshot = adam;

  const long n = batch.size();
  std::vector<int> order(n);
  for (long i = 0; i < n; ++i) order[i] = static_cast<int>(i);

  UpdateStats out;
  VectorXd theta = ac.flat();
  VectorXd grad;
  for (int epoch = 0; epoch < cfg.sgd_iters; ++epoch) {
    // Fisher-Yates
    for (long i = n - 1; i > 0; --i) {
      const long j = static_cast<long>(rng.uniform_int(static_cast<uint64_t>(i + 1)));
      std::swap(order[i], order[j]);
    }
    for (long start = 0; start + cfg.minibatch <= n; start += cfg.minibatch) {
      std::vector<int> idx(order.begin() + start, order.begin() + start + cfg.minibatch);
      const Batch mb = batch.rows(idx);
      LossStats stats;
      try {
        stats = ppo_loss(ac, mb, cfg, kl_coeff, &grad);
      } catch (const std::runtime_error&) {
        ac.set_flat(snapshot);
        adam = adam_snapshot;
        out.aborted = true;
        return out;
      }
      if (!std::isfinite(stats.total) || !grad.allFinite()) {
        ac.set_flat(snapshot);
        adam = adam_snapshot;
        out.aborted = true;
        return out;
      }
      theta = ac.flat();
      adam.step(theta, grad);
      ac.set_flat(theta);
    }
  }

  const LossStats final_stats = ppo_loss(ac, batch, cfg, kl_coeff, nullptr);
  out.policy_loss = final_stats.policy_loss;
  out.vf_loss = final_stats.vf_loss;
  out.entropy = final_stats.entropy;
  out.kl = final_stats.kl;
  if (final_stats.kl > 2.0 * cfg.kl_target) {
    kl_coeff *= 1.5;
  } else if (final_stats.kl < 0.5 * cfg.kl_target) {
    kl_coeff /= 1.5;
  }
  out.kl_coeff = kl_coeff;
  return out;
}

}  // namespace ql::learn
