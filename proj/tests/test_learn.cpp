#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>

#include "learn/gae.hpp"
#include "learn/ppo.hpp"
#include "learn/trainer.hpp"

using namespace ql;
using namespace ql::learn;

namespace {

// brute-force GAE oracle: A_t = sum_k (gamma*lambda)^k delta_{t+k}, cut at
// episode boundaries
GaeResult gae_oracle(const Eigen::VectorXd& r, const Eigen::VectorXd& v, const Eigen::VectorXd& d,
                     double gamma, double lambda) {
  const long T = r.size();
  GaeResult out;
  out.advantages.resize(T);
  out.returns.resize(T);
  for (long t = 0; t < T; ++t) {
    double acc = 0.0, w = 1.0;
    for (long k = t; k < T; ++k) {
      const double delta = r[k] + gamma * v[k + 1] * (1.0 - d[k]) - v[k];
      acc += w * delta;
      if (d[k] != 0.0) break;
      w *= gamma * lambda;
    }
    out.advantages[t] = acc;
    out.returns[t] = acc + v[t];
  }
  return out;
}

Batch random_batch(const ActorCritic& ac, int n, Rng& rng) {
  const int obs_dim = ac.policy.input_dim();
  const int act_dim = ac.act_dim();
  Batch b;
  b.obs.resize(n, obs_dim);
  b.actions.resize(n, act_dim);
  b.old_means.resize(n, act_dim);
  b.old_log_prob.resize(n);
  b.old_values.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  b.old_log_std = ac.log_std;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < obs_dim; ++j) b.obs(i, j) = rng.uniform(-1, 1);
    const VectorXd obs = b.obs.row(i).transpose();
    ActionSample s = sample_action(ac, obs, rng, false);
    b.actions.row(i) = s.action.transpose();
    b.old_means.row(i) = s.mean.transpose();
    b.old_log_prob[i] = s.log_prob;
    b.old_values[i] = s.value;
    b.advantages[i] = rng.uniform(-2, 2);
    b.returns[i] = rng.uniform(-5, 5);
  }
  return b;
}

}  // namespace

TEST_CASE("mlp: zero parameters give zero output") {
  Mlp net({4, 4, 2}, VectorXd::Zero(Mlp::param_count({4, 4, 2})));
  MatrixXd x(1, 4);
  x << 0.3, -0.5, 1.0, 0.2;
  const MatrixXd y = net.forward(x);
  CHECK(y(0, 0) == 0.0);
  CHECK(y(0, 1) == 0.0);
}

TEST_CASE("mlp: linear output head scales with its weight row") {
  Rng rng(1);
  Mlp net = Mlp::init({3, 4, 2}, rng, 1.0);
  MatrixXd x(1, 3);
  x << 0.4, 0.1, -0.7;
  const MatrixXd y0 = net.forward(x);
  // double the last-layer parameters (weights + biases)
  const int head = Mlp::param_count({3, 4, 2}) - Mlp::param_count({3, 4});
  (void)head;
  Mlp net2 = net;
  const int head_params = 4 * 2 + 2;
  net2.params().tail(head_params) *= 2.0;
  const MatrixXd y1 = net2.forward(x);
  CHECK(y1(0, 0) == doctest::Approx(2.0 * y0(0, 0)).epsilon(1e-12));
  CHECK(y1(0, 1) == doctest::Approx(2.0 * y0(0, 1)).epsilon(1e-12));
}

TEST_CASE("mlp: rejects non-finite activations") {
  Mlp net({2, 2}, VectorXd::Constant(Mlp::param_count({2, 2}), 1.0));
  MatrixXd x(1, 2);
  x << NAN, 0.0;
  CHECK_THROWS_AS(net.forward(x), std::runtime_error);
}

TEST_CASE("mlp: analytic value gradient matches central finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Mlp net = Mlp::init({5, 4, 4, 1}, rng, 1.0);
    MatrixXd x(3, 5);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
    Mlp::Cache cache;
    net.forward(x, &cache);
    // scalar loss = sum of outputs
    const MatrixXd d_out = MatrixXd::Ones(3, 1);
    const VectorXd g = net.backward(cache, d_out);
    const double h = 1e-5;
    for (int p = 0; p < net.params().size(); p += 7) {  // sampled parameters
      const double orig = net.params()[p];
      net.params()[p] = orig + h;
      const double fp = net.forward(x).sum();
      net.params()[p] = orig - h;
      const double fm = net.forward(x).sum();
      net.params()[p] = orig;
      const double fd = (fp - fm) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(g[p]), 1e-3});
      CHECK(std::abs(fd - g[p]) / denom < 1e-4);
    }
  }
}

TEST_CASE("gaussian head: log prob at the mean and entropy") {
  Rng rng(5);
  VectorXd log_std = VectorXd::Constant(8, std::log(0.5));
  VectorXd mean = VectorXd::Zero(8);
  const double lp = gaussian_log_prob(mean, mean, log_std);
  CHECK(lp == doctest::Approx(-log_std.sum() - 4.0 * std::log(2 * M_PI)).epsilon(1e-12));
  const double ent = gaussian_entropy(log_std);
  CHECK(ent == doctest::Approx(log_std.sum() + 4.0 * (std::log(2 * M_PI) + 1.0)).epsilon(1e-12));
  // entropy is monotone in each log_std component
  VectorXd wider = log_std;
  wider[3] += 0.1;
  CHECK(gaussian_entropy(wider) > ent);
}

TEST_CASE("sample_action: deterministic mode returns the mean; sampling is unbiased") {
  Rng rng(7);
  ActorCritic ac = ActorCritic::init(6, 2, {8}, rng, std::log(0.5));
  const VectorXd obs = VectorXd::Constant(6, 0.3);
  const ActionSample det = sample_action(ac, obs, rng, true);
  CHECK((det.action - det.mean).norm() == 0.0);

  const int n = 100000;
  VectorXd sum = VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) sum += sample_action(ac, obs, rng, false).action;
  const VectorXd emp = sum / n;
  const double sigma = 0.5;
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(emp[j] - det.mean[j]) < 3.0 * sigma / std::sqrt(double(n)));
  }
}

TEST_CASE("gae: closed-form limits") {
  // gamma=1, lambda=1, zero values, single episode -> suffix sums
  Eigen::VectorXd r(4), v(5), d(4);
  r << 1, 2, 3, 4;
  v.setZero();
  d << 0, 0, 0, 1;
  const GaeResult g = compute_gae(r, v, d, 1.0, 1.0);
  CHECK(g.advantages[0] == doctest::Approx(10.0));
  CHECK(g.advantages[1] == doctest::Approx(9.0));
  CHECK(g.advantages[2] == doctest::Approx(7.0));
  CHECK(g.advantages[3] == doctest::Approx(4.0));

  // lambda=0 -> one-step TD residuals
  Eigen::VectorXd v2(5);
  v2 << 0.5, -0.2, 0.1, 0.3, 0.7;
  const GaeResult td = compute_gae(r, v2, d, 0.9, 0.0);
  for (int t = 0; t < 4; ++t) {
    const double delta = r[t] + 0.9 * v2[t + 1] * (1 - d[t]) - v2[t];
    CHECK(td.advantages[t] == doctest::Approx(delta).epsilon(1e-12));
  }
}

TEST_CASE("gae: matches the nested-sum oracle on random episodes") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = 1 + static_cast<int>(rng.uniform_int(20));
    Eigen::VectorXd r(T), v(T + 1), d(T);
    for (int t = 0; t < T; ++t) {
      r[t] = rng.uniform(-2, 2);
      v[t] = rng.uniform(-1, 1);
      d[t] = rng.uniform() < 0.15 ? 1.0 : 0.0;
    }
    v[T] = rng.uniform(-1, 1);
    const double gamma = rng.uniform(0.8, 1.0);
    const double lambda = rng.uniform(0.0, 1.0);
    const GaeResult got = compute_gae(r, v, d, gamma, lambda);
    const GaeResult want = gae_oracle(r, v, d, gamma, lambda);
    for (int t = 0; t < T; ++t) {
      CHECK(std::abs(got.advantages[t] - want.advantages[t]) < 1e-10);
      CHECK(std::abs(got.returns[t] - want.returns[t]) < 1e-10);
    }
  }
  CHECK_THROWS_AS(compute_gae(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3),
                              Eigen::VectorXd::Zero(3), 0.99, 0.95),
                  std::invalid_argument);
}

TEST_CASE("ppo_loss: full analytic gradient matches central finite differences") {
  Rng rng(13);
  const PpoConfig cfg;
  int draws = 0;
  while (draws < 30) {
    ActorCritic ac = ActorCritic::init(5, 3, {4, 4}, rng, std::log(0.6));
    // random perturbation so old != new and ratios spread around 1
    Batch b = random_batch(ac, 12, rng);
    VectorXd theta = ac.flat();
    for (int i = 0; i < theta.size(); ++i) theta[i] += rng.uniform(-0.01, 0.01);
    ac.set_flat(theta);

    VectorXd grad;
    ppo_loss(ac, b, cfg, 0.7, &grad);
    const double h = 1e-5;
    bool kink = false;
    for (int p = 0; p < theta.size(); p += 11) {
      VectorXd tp = theta, tm = theta;
      tp[p] += h;
      tm[p] -= h;
      ac.set_flat(tp);
      const double fp = ppo_loss(ac, b, cfg, 0.7, nullptr).total;
      ac.set_flat(tm);
      const double fm = ppo_loss(ac, b, cfg, 0.7, nullptr).total;
      ac.set_flat(theta);
      const double fd = (fp - fm) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[p]), 1e-3});
      if (std::abs(fd - grad[p]) / denom >= 1e-4) {
        kink = true;  // rare clip-boundary straddle; retry the draw
        break;
      }
    }
    if (!kink) ++draws;
  }
  CHECK(draws == 30);
}

TEST_CASE("ppo_loss: zero advantages zero out the policy-network surrogate gradient") {
  Rng rng(17);
  PpoConfig cfg;
  cfg.vf_coeff = 0.0;
  cfg.entropy_coeff = 0.0;
  ActorCritic ac = ActorCritic::init(4, 2, {4}, rng, std::log(0.5));
  Batch b = random_batch(ac, 16, rng);
  b.advantages.setZero();
  VectorXd grad;
  ppo_loss(ac, b, cfg, 0.0, &grad);
  // policy segment of the flat gradient
  const long np = ac.policy.params().size();
  CHECK(grad.segment(0, np).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("ppo_loss: at ratio one the surrogate gradient is the vanilla policy gradient") {
  Rng rng(19);
  PpoConfig cfg;
  cfg.vf_coeff = 0.0;
  cfg.entropy_coeff = 0.0;
  ActorCritic ac = ActorCritic::init(4, 2, {4}, rng, std::log(0.5));
  Batch b = random_batch(ac, 10, rng);  // old == current -> rho = 1
  VectorXd grad;
  ppo_loss(ac, b, cfg, 0.0, &grad);

  // vanilla PG by finite differences of -1/N sum A_i log pi(a_i | s_i)
  const VectorXd theta = ac.flat();
  const double h = 1e-6;
  auto neg_pg = [&](const VectorXd& t) {
    ActorCritic tmp = ac;
    tmp.set_flat(t);
    double acc = 0.0;
    for (long i = 0; i < b.size(); ++i) {
      const MatrixXd mean = tmp.policy.forward(b.obs.row(i));
      acc += b.advantages[i] *
             gaussian_log_prob(b.actions.row(i).transpose(), mean.row(0).transpose(), tmp.log_std);
    }
    return -acc / b.size();
  };
  for (int p = 0; p < theta.size(); p += 5) {
    VectorXd tp = theta, tm = theta;
    tp[p] += h;
    tm[p] -= h;
    const double fd = (neg_pg(tp) - neg_pg(tm)) / (2 * h);
    CHECK(std::abs(fd - grad[p]) < 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("ppo_loss: clipped surrogate never exceeds the unclipped surrogate") {
  Rng rng(23);
  const PpoConfig cfg;
  ActorCritic ac = ActorCritic::init(4, 2, {4}, rng, std::log(0.5));
  Batch b = random_batch(ac, 64, rng);
  VectorXd theta = ac.flat();
  for (int i = 0; i < theta.size(); ++i) theta[i] += rng.uniform(-0.05, 0.05);
  ac.set_flat(theta);
  double clipped_sum = 0.0, unclipped_sum = 0.0;
  for (long i = 0; i < b.size(); ++i) {
    const MatrixXd mean = ac.policy.forward(b.obs.row(i));
    const double lp =
        gaussian_log_prob(b.actions.row(i).transpose(), mean.row(0).transpose(), ac.log_std);
    const double rho = std::exp(lp - b.old_log_prob[i]);
    const double rc = std::clamp(rho, 1.0 - cfg.clip, 1.0 + cfg.clip);
    clipped_sum += std::min(rho * b.advantages[i], rc * b.advantages[i]);
    unclipped_sum += rho * b.advantages[i];
    CHECK(std::min(rho * b.advantages[i], rc * b.advantages[i]) <= rho * b.advantages[i] + 1e-15);
  }
  CHECK(clipped_sum <= unclipped_sum + 1e-12);
}

TEST_CASE("ppo_update: single-parameter policy moves along the finite-difference descent direction") {
  Rng rng(29);
  ActorCritic ac = ActorCritic::init(1, 1, {}, rng, std::log(0.5));
  Batch b = random_batch(ac, 20, rng);
  PpoConfig cfg;
  cfg.sgd_iters = 1;
  cfg.minibatch = 20;
  cfg.lr = 1e-3;

  // normalize advantages the way ppo_update will
  Batch probe = b;
  const double m = probe.advantages.mean();
  const double sd = std::sqrt((probe.advantages.array() - m).square().sum() /
                              std::max<long>(probe.size() - 1, 1));
  probe.advantages = (probe.advantages.array() - m) / sd;

  const VectorXd theta0 = ac.flat();
  VectorXd grad;
  ppo_loss(ac, probe, cfg, 1.0, &grad);

  double kl_coeff = 1.0;
  Adam adam;
  adam.lr = cfg.lr;
  adam.reset(ac.param_count());
  const UpdateStats st = ppo_update(ac, b, cfg, kl_coeff, adam, rng);
  CHECK(!st.aborted);
  const VectorXd delta = ac.flat() - theta0;
  for (int p = 0; p < theta0.size(); ++p) {
    if (std::abs(grad[p]) > 1e-8) {
      CHECK(delta[p] * grad[p] < 0.0);  // moved against the loss gradient
    }
  }
}

TEST_CASE("ppo_update: non-finite batch aborts and restores parameters") {
  Rng rng(31);
  ActorCritic ac = ActorCritic::init(4, 2, {4}, rng, std::log(0.5));
  Batch b = random_batch(ac, 40, rng);
  b.advantages[3] = std::numeric_limits<double>::quiet_NaN();
  PpoConfig cfg;
  double kl_coeff = 1.0;
  Adam adam;
  adam.reset(ac.param_count());
  const VectorXd theta0 = ac.flat();
  const UpdateStats st = ppo_update(ac, b, cfg, kl_coeff, adam, rng);
  CHECK(st.aborted);
  CHECK((ac.flat() - theta0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("toy bandit: policy mean approaches the analytic optimum") {
  // reward = -(a - 0.5)^2, constant observation; optimum mean action = 0.5
  Rng rng(37);
  ActorCritic ac = ActorCritic::init(1, 1, {8}, rng, std::log(0.5));
  PpoConfig cfg;
  cfg.lr = 5e-3;
  cfg.minibatch = 20;
  cfg.sgd_iters = 10;
  Adam adam;
  adam.lr = cfg.lr;
  adam.reset(ac.param_count());
  double kl_coeff = cfg.kl_coeff;

  const VectorXd obs = VectorXd::Zero(1);
  for (int iter = 0; iter < 50; ++iter) {
    const int n = 200;
    Batch b;
    b.obs = MatrixXd::Zero(n, 1);
    b.actions.resize(n, 1);
    b.old_means.resize(n, 1);
    b.old_log_prob.resize(n);
    b.old_values.resize(n);
    b.advantages.resize(n);
    b.returns.resize(n);
    b.old_log_std = ac.log_std;
    for (int i = 0; i < n; ++i) {
      const ActionSample s = sample_action(ac, obs, rng, false);
      const double r = -(s.action[0] - 0.5) * (s.action[0] - 0.5);
      b.actions(i, 0) = s.action[0];
      b.old_means(i, 0) = s.mean[0];
      b.old_log_prob[i] = s.log_prob;
      b.old_values[i] = s.value;
      b.advantages[i] = r - s.value;
      b.returns[i] = r;
    }
    ppo_update(ac, b, cfg, kl_coeff, adam, rng);
  }
  const double mean = ac.policy.forward(obs.transpose())(0, 0);
  CHECK(std::abs(mean - 0.5) < 0.1);
}

TEST_CASE("trainer: zero iterations leave parameters untouched") {
  env::EnvConfig env_cfg;
  env_cfg.terrain.mode = terrain::Params::Mode::flat;
  env_cfg.terrain.obstacle_count = 0;
  TrainConfig tc;
  tc.num_envs = 1;
  tc.fragment_len = 20;
  tc.batch_size = 40;
  tc.hidden = {8};
  Trainer t(env_cfg, PpoConfig{}, tc, 42);
  const VectorXd theta0 = t.actor_critic().flat();
  t.run(0);
  CHECK((t.actor_critic().flat() - theta0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(t.iteration() == 0);
}

TEST_CASE("trainer: single-worker runs are deterministic") {
  env::EnvConfig env_cfg;
  env_cfg.terrain.mode = terrain::Params::Mode::flat;
  env_cfg.terrain.obstacle_count = 0;
  TrainConfig tc;
  tc.num_envs = 1;
  tc.fragment_len = 25;
  tc.batch_size = 100;
  tc.hidden = {8};
  tc.seed = 5;

  std::vector<IterationLog> la, lb;
  for (auto* logs : {&la, &lb}) {
    Trainer t(env_cfg, PpoConfig{}, tc, 42);
    t.run(3, [logs](const IterationLog& log) { logs->push_back(log); });
  }
  REQUIRE(la.size() == lb.size());
  for (size_t i = 0; i < la.size(); ++i) {
    CHECK(la[i].mean_episode_reward == lb[i].mean_episode_reward);
    CHECK(la[i].kl == lb[i].kl);
    CHECK(la[i].policy_loss == lb[i].policy_loss);
  }
}

TEST_CASE("trainer: checkpoint round-trip and hash guard") {
  env::EnvConfig env_cfg;
  env_cfg.terrain.mode = terrain::Params::Mode::flat;
  env_cfg.terrain.obstacle_count = 0;
  TrainConfig tc;
  tc.num_envs = 1;
  tc.fragment_len = 20;
  tc.batch_size = 40;
  tc.hidden = {8};
  Trainer t(env_cfg, PpoConfig{}, tc, 42);
  t.run(1);
  const std::string path = "trainer_roundtrip.ckpt";
  t.save_checkpoint(path);

  Trainer u(env_cfg, PpoConfig{}, tc, 42);
  u.load_checkpoint(path);
  CHECK((u.actor_critic().flat() - t.actor_critic().flat()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(u.iteration() == t.iteration());

  Trainer w(env_cfg, PpoConfig{}, tc, 43);  // different config hash
  CHECK_THROWS_AS(w.load_checkpoint(path), std::runtime_error);
  CHECK_NOTHROW(w.load_checkpoint(path, true));

  const CheckpointInfo info = inspect_checkpoint(path);
  CHECK(info.config_hash == 42);
  CHECK(info.iteration == 1);
  const LoadedPolicy lp = load_policy(path);
  CHECK(lp.ac.policy.input_dim() == 44);
  std::remove(path.c_str());
}
