#pragma once

#include <optional>
#include <string>
#include <vector>

#include "harness/config.hpp"

namespace ql::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct TrainOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> iterations;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
};

struct EvalEpisode {
  int index = 0;
  uint64_t seed = 0;
  env::Outcome outcome = env::Outcome::running;
  double total_reward = 0.0;
  int steps = 0;
  double mean_vx = 0.0;
  double final_x = 0.0;
};

struct EvalReport {
  std::string terrain_kind;
  int episodes = 0;
  double success_rate = 0.0;
  double falling_rate = 0.0;
  double timeout_rate = 0.0;
  double mean_velocity = 0.0;
  std::vector<EvalEpisode> records;
};

struct EvalOptions {
  std::string checkpoint;
  std::string terrain_kind = "rough";  // flat | rough
  int episodes = 100;
  uint64_t seed = 0;
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  bool force = false;
  bool deterministic = true;
};

// library-level eval (used by cmd_eval and tests)
EvalReport run_eval(const learn::ActorCritic& ac, const env::EnvConfig& env_cfg, int episodes,
                    uint64_t seed, bool deterministic);

int cmd_train(const TrainOptions& opt, std::string& err);
int cmd_eval(const EvalOptions& opt, std::string& err, EvalReport* report_out = nullptr);

struct ReplayOptions {
  std::string checkpoint;
  uint64_t seed = 0;
  std::string out_path;
  std::optional<std::string> config_path;
  bool force = false;
};
int cmd_replay(const ReplayOptions& opt, std::string& err);

struct TerrainOptions {
  uint64_t seed = 0;
  std::string mode = "rough";
  std::optional<int> obstacles;
  std::optional<double> length;
  std::string out_path;
};
int cmd_terrain(const TerrainOptions& opt, std::string& err);

int cmd_inspect(const std::string& checkpoint, std::string& out, std::string& err);

// replay CSV column schema, in order
const std::vector<std::string>& replay_columns();

}  // namespace ql::harness
