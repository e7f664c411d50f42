#include "quadloco.h"

#include <cstring>
#include <string>

#include "env/env.hpp"
#include "harness/commands.hpp"
#include "harness/config.hpp"

namespace {

void copy_err(const std::string& msg, char* err, size_t err_len) {
  if (!err || err_len == 0) return;
  std::strncpy(err, msg.c_str(), err_len - 1);
  err[err_len - 1] = '\0';
}

int outcome_code(ql::env::Outcome o) {
  switch (o) {
    case ql::env::Outcome::running: return QL_RUNNING;
    case ql::env::Outcome::success: return QL_SUCCESS;
    case ql::env::Outcome::fell: return QL_FELL;
    case ql::env::Outcome::timeout: return QL_TIMEOUT;
  }
  return QL_RUNNING;
}

}  // namespace

struct ql_env {
  ql::env::Env env;
  explicit ql_env(const ql::env::EnvConfig& cfg) : env(cfg) {}
};

extern "C" {

ql_env* ql_env_create(const char* config_path, char* err, size_t err_len) {
  try {
    ql::harness::RunConfig cfg;
    if (config_path) cfg = ql::harness::load_run_config(config_path);
    return new ql_env(cfg.env);
  } catch (const std::exception& e) {
    copy_err(e.what(), err, err_len);
    return nullptr;
  }
}

void ql_env_destroy(ql_env* env) { delete env; }

int ql_env_reset(ql_env* env, uint64_t seed, double obs[QL_OBS_DIM]) {
  if (!env || !obs) return QL_ERR_USAGE;
  try {
    const auto o = env->env.reset(seed);
    std::memcpy(obs, o.data(), sizeof(double) * QL_OBS_DIM);
  } catch (const std::exception&) {
    return QL_ERR_RUNTIME;
  }
  return QL_OK;
}

int ql_env_step(ql_env* env, const double action[QL_ACT_DIM], double obs[QL_OBS_DIM],
                double* reward, int* done, int* outcome, char* err, size_t err_len) {
  if (!env || !action) return QL_ERR_USAGE;
  try {
    std::array<double, 8> a{};
    std::memcpy(a.data(), action, sizeof(double) * QL_ACT_DIM);
    const ql::env::StepResult sr = env->env.step(a);
    if (obs) std::memcpy(obs, sr.observation.data(), sizeof(double) * QL_OBS_DIM);
    if (reward) *reward = sr.reward;
    if (done) *done = sr.done ? 1 : 0;
    if (outcome) *outcome = outcome_code(sr.outcome);
  } catch (const std::exception& e) {
    copy_err(e.what(), err, err_len);
    return QL_ERR_RUNTIME;
  }
  return QL_OK;
}

int ql_train(const ql_train_opts* opts, char* err, size_t err_len) {
  if (!opts || !opts->config_path) {
    copy_err("config path required", err, err_len);
    return QL_ERR_USAGE;
  }
  ql::harness::TrainOptions t;
  t.config_path = opts->config_path;
  if (opts->seed >= 0) t.seed = static_cast<uint64_t>(opts->seed);
  if (opts->iterations >= 0) t.iterations = opts->iterations;
  if (opts->out_dir) t.out_dir = std::string(opts->out_dir);
  if (opts->workers >= 1) t.workers = opts->workers;
  std::string msg;
  const int rc = ql::harness::cmd_train(t, msg);
  if (rc != QL_OK) copy_err(msg, err, err_len);
  return rc;
}

int ql_eval(const ql_eval_opts* opts, ql_eval_report* report, char* err, size_t err_len) {
  if (!opts || !opts->checkpoint) {
    copy_err("checkpoint required", err, err_len);
    return QL_ERR_USAGE;
  }
  ql::harness::EvalOptions e;
  e.checkpoint = opts->checkpoint;
  if (opts->terrain) e.terrain_kind = opts->terrain;
  e.episodes = opts->episodes;
  e.seed = opts->seed;
  if (opts->config_path) e.config_path = std::string(opts->config_path);
  if (opts->out_dir) e.out_dir = std::string(opts->out_dir);
  e.force = opts->force != 0;
  e.deterministic = opts->deterministic != 0;
  std::string msg;
  ql::harness::EvalReport rep;
  const int rc = ql::harness::cmd_eval(e, msg, &rep);
  if (rc != QL_OK) {
    copy_err(msg, err, err_len);
    return rc;
  }
  if (report) {
    report->episodes = rep.episodes;
    report->success_rate = rep.success_rate;
    report->falling_rate = rep.falling_rate;
    report->timeout_rate = rep.timeout_rate;
    report->mean_velocity = rep.mean_velocity;
  }
  return QL_OK;
}

int ql_replay(const char* checkpoint, uint64_t seed, const char* out_path,
              const char* config_path, int force, char* err, size_t err_len) {
  if (!checkpoint || !out_path) {
    copy_err("checkpoint and output path required", err, err_len);
    return QL_ERR_USAGE;
  }
  ql::harness::ReplayOptions r;
  r.checkpoint = checkpoint;
  r.seed = seed;
  r.out_path = out_path;
  if (config_path) r.config_path = std::string(config_path);
  r.force = force != 0;
  std::string msg;
  const int rc = ql::harness::cmd_replay(r, msg);
  if (rc != QL_OK) copy_err(msg, err, err_len);
  return rc;
}

int ql_terrain(uint64_t seed, const char* mode, int obstacles, double length,
               const char* out_path, char* err, size_t err_len) {
  if (!out_path) {
    copy_err("output path required", err, err_len);
    return QL_ERR_USAGE;
  }
  ql::harness::TerrainOptions t;
  t.seed = seed;
  if (mode) t.mode = mode;
  if (obstacles >= 0) t.obstacles = obstacles;
  if (length > 0.0) t.length = length;
  t.out_path = out_path;
  std::string msg;
  const int rc = ql::harness::cmd_terrain(t, msg);
  if (rc != QL_OK) copy_err(msg, err, err_len);
  return rc;
}

int ql_inspect_checkpoint(const char* checkpoint, char* out, size_t out_len, char* err,
                          size_t err_len) {
  if (!checkpoint) {
    copy_err("checkpoint required", err, err_len);
    return QL_ERR_USAGE;
  }
  std::string text, msg;
  const int rc = ql::harness::cmd_inspect(checkpoint, text, msg);
  if (rc != QL_OK) {
    copy_err(msg, err, err_len);
    return rc;
  }
  if (out && out_len > 0) {
    std::strncpy(out, text.c_str(), out_len - 1);
    out[out_len - 1] = '\0';
  }
  return QL_OK;
}

const char* ql_version(void) { return "0.1.0"; }

}  // extern "C"
