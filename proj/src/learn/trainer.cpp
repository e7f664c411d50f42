#include "learn/trainer.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ql::learn {

namespace {

constexpr char kMagic[8] = {'Q', 'L', 'C', 'K', 'P', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_i64(std::ostream& os, int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), 8); }
uint32_t read_u32(std::istream& is) { uint32_t v; is.read(reinterpret_cast<char*>(&v), 4); return v; }
uint64_t read_u64(std::istream& is) { uint64_t v; is.read(reinterpret_cast<char*>(&v), 8); return v; }
int64_t read_i64(std::istream& is) { int64_t v; is.read(reinterpret_cast<char*>(&v), 8); return v; }
double read_f64(std::istream& is) { double v; is.read(reinterpret_cast<char*>(&v), 8); return v; }

void write_vec(std::ostream& os, const VectorXd& v) {
  write_u64(os, static_cast<uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
}
VectorXd read_vec(std::istream& is) {
  const auto n = static_cast<long>(read_u64(is));
  VectorXd v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
  return v;
}
void write_sizes(std::ostream& os, const std::vector<int>& s) {
  write_u32(os, static_cast<uint32_t>(s.size()));
  for (int x : s) write_u32(os, static_cast<uint32_t>(x));
}
std::vector<int> read_sizes(std::istream& is) {
  const uint32_t n = read_u32(is);
  std::vector<int> s(n);
  for (uint32_t i = 0; i < n; ++i) s[i] = static_cast<int>(read_u32(is));
  return s;
}
void write_str(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::istream& is) {
  const auto n = static_cast<size_t>(read_u64(is));
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

}  // namespace

EpisodeResult run_episode(env::Env& e, const ActorCritic& ac, uint64_t seed, bool deterministic,
                          Rng& rng) {
  EpisodeResult res;
  sense::Observation44 obs = e.reset(seed);
  std::vector<double> vxs;
  while (!e.done()) {
    const VectorXd obs_vec = Eigen::Map<const VectorXd>(obs.data(), sense::kObservationDim);
    const ActionSample s = sample_action(ac, obs_vec, rng, deterministic);
    std::array<double, 8> action{};
    for (int j = 0; j < 8; ++j) action[j] = s.action[j];
    const env::StepResult sr = e.step(action);
    obs = sr.observation;
    res.total_reward += sr.reward;
    res.steps += 1;
    vxs.push_back(sr.vx);
    res.final_x = sr.hull_position.x();
  }
  res.outcome = e.outcome();
  if (!vxs.empty()) {
    double sum = 0.0;
    for (double v : vxs) sum += v;
    res.mean_vx = sum / static_cast<double>(vxs.size());
    double half = 0.0;
    const size_t start = vxs.size() / 2;
    for (size_t i = start; i < vxs.size(); ++i) half += vxs[i];
    res.mean_vx_second_half = half / static_cast<double>(vxs.size() - start);
  }
  return res;
}

Trainer::Trainer(const env::EnvConfig& env_cfg, const PpoConfig& ppo_cfg,
                 const TrainConfig& train_cfg, uint64_t config_hash)
    : env_cfg_(env_cfg),
      ppo_cfg_(ppo_cfg),
      train_cfg_(train_cfg),
      config_hash_(config_hash),
      kl_coeff_(ppo_cfg.kl_coeff),
      rng_(train_cfg.seed) {
  ac_ = ActorCritic::init(sense::kObservationDim, 8, train_cfg_.hidden, rng_,
                          train_cfg_.initial_log_std);
  adam_.lr = ppo_cfg_.lr;
  adam_.reset(ac_.param_count());
  workers_.resize(train_cfg_.num_envs);
  for (auto& w : workers_) w.env = std::make_unique<env::Env>(env_cfg_);
}

Batch Trainer::collect_batch(IterationLog& log) {
  const int frag = train_cfg_.fragment_len;
  const int fragments = train_cfg_.batch_size / frag;
  const long n = static_cast<long>(fragments) * frag;

  Batch batch;
  batch.obs.resize(n, sense::kObservationDim);
  batch.actions.resize(n, 8);
  batch.old_means.resize(n, 8);
  batch.old_log_std = ac_.log_std;
  batch.old_log_prob.resize(n);
  batch.old_values.resize(n);
  batch.advantages.resize(n);
  batch.returns.resize(n);

  double completed_reward = 0.0;
  double completed_len = 0.0;
  int completed = 0;
  long row = 0;

  for (int f = 0; f < fragments; ++f) {
    Worker& w = workers_[f % workers_.size()];
    VectorXd rewards(frag), dones(frag), values(frag + 1);
    const long base = row;
    for (int t = 0; t < frag; ++t) {
      if (w.needs_reset) {
        w.obs = w.env->reset(rng_.next_u64());
        w.episode_reward = 0.0;
        w.episode_steps = 0;
        w.needs_reset = false;
      }
      const VectorXd obs_vec = Eigen::Map<const VectorXd>(w.obs.data(), sense::kObservationDim);
      const ActionSample s = sample_action(ac_, obs_vec, rng_, false);
      std::array<double, 8> action{};
      for (int j = 0; j < 8; ++j) action[j] = s.action[j];
      const env::StepResult sr = w.env->step(action);

      batch.obs.row(row) = obs_vec.transpose();
      batch.actions.row(row) = s.action.transpose();
      batch.old_means.row(row) = s.mean.transpose();
      batch.old_log_prob[row] = s.log_prob;
      batch.old_values[row] = s.value;
      rewards[t] = sr.reward;
      dones[t] = sr.done ? 1.0 : 0.0;
      values[t] = s.value;
      w.obs = sr.observation;
      w.episode_reward += sr.reward;
      w.episode_steps += 1;
      if (sr.done) {
        completed_reward += w.episode_reward;
        completed_len += w.episode_steps;
        completed += 1;
        w.needs_reset = true;
      }
      ++row;
    }
    // bootstrap for truncated fragments
    if (w.needs_reset) {
      values[frag] = 0.0;
    } else {
      const VectorXd obs_vec = Eigen::Map<const VectorXd>(w.obs.data(), sense::kObservationDim);
      values[frag] = ac_.value.forward(obs_vec.transpose())(0, 0);
    }
    const GaeResult gae = compute_gae(rewards, values, dones, ppo_cfg_.gamma, ppo_cfg_.lambda);
    batch.advantages.segment(base, frag) = gae.advantages;
    batch.returns.segment(base, frag) = gae.returns;
  }

  if (completed > 0) {
    log.mean_episode_reward = completed_reward / completed;
    log.mean_episode_length = completed_len / completed;
  } else {
    // no episode finished this iteration; report the running partial returns
    double partial = 0.0;
    for (const Worker& w : workers_) partial += w.episode_reward;
    log.mean_episode_reward = partial / static_cast<double>(workers_.size());
    log.mean_episode_length = 0.0;
  }
  log.episodes_completed = completed;
  return batch;
}

void Trainer::run(int iterations, const Callback& cb) {
  for (int it = 0; it < iterations; ++it) {
    IterationLog log;
    iteration_ += 1;
    log.iteration = iteration_;
    Batch batch = collect_batch(log);
    const UpdateStats stats = ppo_update(ac_, batch, ppo_cfg_, kl_coeff_, adam_, rng_);
    log.entropy = stats.entropy;
    log.kl = stats.kl;
    log.policy_loss = stats.policy_loss;
    log.vf_loss = stats.vf_loss;
    log.kl_coeff = stats.kl_coeff;
    log.aborted = stats.aborted;
    if (cb) cb(log);
  }
}

void Trainer::save_checkpoint(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
  os.write(kMagic, 8);
  write_u32(os, kVersion);
  write_u64(os, config_hash_);
  write_u32(os, static_cast<uint32_t>(iteration_));
  write_sizes(os, ac_.policy.sizes());
  write_sizes(os, ac_.value.sizes());
  write_vec(os, ac_.policy.params());
  write_vec(os, ac_.log_std);
  write_vec(os, ac_.value.params());
  write_vec(os, adam_.m);
  write_vec(os, adam_.v);
  write_i64(os, adam_.t);
  write_f64(os, kl_coeff_);
  write_str(os, rng_.serialize());
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

namespace {

struct RawCheckpoint {
  CheckpointInfo info;
  VectorXd policy_params, log_std, value_params, adam_m, adam_v;
  int64_t adam_t = 0;
  std::string rng_state;
};

RawCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not a quadloco checkpoint: " + path);
  }
  RawCheckpoint raw;
  raw.info.version = read_u32(is);
  raw.info.config_hash = read_u64(is);
  raw.info.iteration = static_cast<int>(read_u32(is));
  raw.info.policy_sizes = read_sizes(is);
  raw.info.value_sizes = read_sizes(is);
  raw.policy_params = read_vec(is);
  raw.log_std = read_vec(is);
  raw.value_params = read_vec(is);
  raw.adam_m = read_vec(is);
  raw.adam_v = read_vec(is);
  raw.adam_t = read_i64(is);
  raw.info.kl_coeff = read_f64(is);
  raw.rng_state = read_str(is);
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  raw.info.param_count = raw.policy_params.size() + raw.log_std.size() + raw.value_params.size();
  return raw;
}

}  // namespace

void Trainer::load_checkpoint(const std::string& path, bool force) {
  RawCheckpoint raw = read_checkpoint(path);
  if (!force && config_hash_ != 0 && raw.info.config_hash != 0 &&
      raw.info.config_hash != config_hash_) {
    throw std::runtime_error("checkpoint/config hash mismatch (use force to override)");
  }
  ac_.policy = Mlp(raw.info.policy_sizes, std::move(raw.policy_params));
  ac_.log_std = std::move(raw.log_std);
  ac_.value = Mlp(raw.info.value_sizes, std::move(raw.value_params));
  adam_.m = std::move(raw.adam_m);
  adam_.v = std::move(raw.adam_v);
  adam_.t = raw.adam_t;
  kl_coeff_ = raw.info.kl_coeff;
  rng_.deserialize(raw.rng_state);
  iteration_ = raw.info.iteration;
  for (auto& w : workers_) w.needs_reset = true;
}

CheckpointInfo inspect_checkpoint(const std::string& path) { return read_checkpoint(path).info; }

LoadedPolicy load_policy(const std::string& path) {
  RawCheckpoint raw = read_checkpoint(path);
  LoadedPolicy lp;
  lp.info = raw.info;
  lp.ac.policy = Mlp(raw.info.policy_sizes, std::move(raw.policy_params));
  lp.ac.log_std = std::move(raw.log_std);
  lp.ac.value = Mlp(raw.info.value_sizes, std::move(raw.value_params));
  return lp;
}

}  // namespace ql::learn
