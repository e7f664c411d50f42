// quadloco command-line front end; talks to the core only through the C API.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "quadloco.h"

int main(int argc, char** argv) {
  CLI::App app{"quadloco: 2-D quadruped locomotion simulator and PPO trainer"};
  app.require_subcommand(1);

  char err[1024] = {0};

  // train
  auto* train = app.add_subcommand("train", "train a policy from a run config");
  std::string train_config;
  int64_t train_seed = -1;
  int train_iters = -1, train_workers = -1;
  std::string train_out;
  train->add_option("--config", train_config, "run config file (YAML)")->required();
  train->add_option("--seed", train_seed, "seed override");
  train->add_option("--iterations", train_iters, "iteration count override");
  train->add_option("--out", train_out, "output directory override");
  train->add_option("--workers", train_workers, "parallel env count override");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint over seeded episodes");
  std::string eval_ckpt, eval_terrain = "rough", eval_config, eval_out;
  int eval_episodes = 100;
  uint64_t eval_seed = 0;
  bool eval_force = false, eval_stochastic = false;
  eval->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval->add_option("--terrain", eval_terrain, "flat|rough")->check(CLI::IsMember({"flat", "rough"}));
  eval->add_option("--episodes", eval_episodes, "episode count");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--config", eval_config, "run config for the eval environment");
  eval->add_option("--out", eval_out, "report output directory");
  eval->add_flag("--force", eval_force, "skip checkpoint/config hash check");
  bool eval_deterministic = false;
  eval->add_flag("--stochastic", eval_stochastic, "sample actions instead of the mean");
  eval->add_flag("--deterministic", eval_deterministic, "use the mean action (default)")
      ->excludes("--stochastic");

  // replay
  auto* replay = app.add_subcommand("replay", "record one deterministic episode as CSV");
  std::string replay_ckpt, replay_out, replay_config;
  uint64_t replay_seed = 0;
  bool replay_force = false;
  replay->add_option("--checkpoint", replay_ckpt, "checkpoint file")->required();
  replay->add_option("--seed", replay_seed, "episode seed");
  replay->add_option("--out", replay_out, "output CSV path")->required();
  replay->add_option("--config", replay_config, "run config for the replay environment");
  replay->add_flag("--force", replay_force, "skip checkpoint/config hash check");

  // terrain
  auto* terrain = app.add_subcommand("terrain", "generate a terrain profile file");
  std::string terrain_mode = "rough", terrain_out;
  uint64_t terrain_seed = 0;
  int terrain_obstacles = -1;
  double terrain_length = -1.0;
  terrain->add_option("--seed", terrain_seed, "terrain seed");
  terrain->add_option("--terrain", terrain_mode, "flat|rough")
      ->check(CLI::IsMember({"flat", "rough"}));
  terrain->add_option("--obstacles", terrain_obstacles, "obstacle count");
  terrain->add_option("--length", terrain_length, "terrain length (m)");
  terrain->add_option("--out", terrain_out, "output path")->required();

  // inspect-checkpoint
  auto* inspect = app.add_subcommand("inspect-checkpoint", "print checkpoint metadata");
  std::string inspect_ckpt;
  inspect->add_option("--checkpoint", inspect_ckpt, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return QL_ERR_USAGE;
  }

  int rc = QL_ERR_USAGE;
  if (*train) {
    ql_train_opts opts{};
    opts.config_path = train_config.c_str();
    opts.seed = train_seed;
    opts.iterations = train_iters;
    opts.out_dir = train_out.empty() ? nullptr : train_out.c_str();
    opts.workers = train_workers;
    rc = ql_train(&opts, err, sizeof(err));
  } else if (*eval) {
    ql_eval_opts opts{};
    opts.checkpoint = eval_ckpt.c_str();
    opts.terrain = eval_terrain.c_str();
    opts.episodes = eval_episodes;
    opts.seed = eval_seed;
    opts.config_path = eval_config.empty() ? nullptr : eval_config.c_str();
    opts.out_dir = eval_out.empty() ? nullptr : eval_out.c_str();
    opts.force = eval_force ? 1 : 0;
    opts.deterministic = eval_stochastic ? 0 : 1;
    ql_eval_report report{};
    rc = ql_eval(&opts, &report, err, sizeof(err));
    if (rc == QL_OK) {
      std::printf("terrain=%s episodes=%d success=%.3f falling=%.3f timeout=%.3f mean_vx=%.3f\n",
                  eval_terrain.c_str(), report.episodes, report.success_rate, report.falling_rate,
                  report.timeout_rate, report.mean_velocity);
    }
  } else if (*replay) {
    rc = ql_replay(replay_ckpt.c_str(), replay_seed, replay_out.c_str(),
                   replay_config.empty() ? nullptr : replay_config.c_str(), replay_force ? 1 : 0,
                   err, sizeof(err));
  } else if (*terrain) {
    rc = ql_terrain(terrain_seed, terrain_mode.c_str(), terrain_obstacles, terrain_length,
                    terrain_out.c_str(), err, sizeof(err));
  } else if (*inspect) {
    char out[4096] = {0};
    rc = ql_inspect_checkpoint(inspect_ckpt.c_str(), out, sizeof(out), err, sizeof(err));
    if (rc == QL_OK) std::fputs(out, stdout);
  }

  if (rc != QL_OK && err[0] != '\0') std::fprintf(stderr, "error: %s\n", err);
  return rc;
}
