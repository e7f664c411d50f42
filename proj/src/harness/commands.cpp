#include "harness/commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace ql::harness {

namespace fs = std::filesystem;

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string hash_hex(uint64_t hash) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
  return buf;
}

void write_metadata(const RunConfig& cfg, uint64_t hash, const std::string& dir) {
  std::ofstream os(dir + "/run_metadata.txt");
  os << "# quadloco run metadata\n";
  os << "config_hash " << hash_hex(hash) << "\n";
  os << "---\n" << canonical_serialize(cfg);
}

bool hash_check(uint64_t checkpoint_hash, const RunConfig& cfg, bool force, std::string& err) {
  if (force || checkpoint_hash == 0) return true;
  if (checkpoint_hash != config_hash(cfg)) {
    err = "checkpoint was produced by a different config (hash mismatch); pass --force to override";
    return false;
  }
  return true;
}

}  // namespace

int cmd_train(const TrainOptions& opt, std::string& err) {
  RunConfig cfg;
  try {
    cfg = load_run_config(opt.config_path);
  } catch (const ConfigError& e) {
    err = e.what();
    return kExitUsage;
  }
  // the hash identifies the config file contents; command-line conveniences
  // (seed, iteration count, workers, output dir) do not change identity
  const uint64_t hash = config_hash(cfg);
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.train.seed = *opt.seed;
  }
  if (opt.iterations) cfg.train.iterations = *opt.iterations;
  if (opt.workers) cfg.train.num_envs = *opt.workers;
  if (opt.out_dir) cfg.output_dir = *opt.out_dir;

  try {
    const std::string dir = cfg.resolved_output_dir();
    fs::create_directories(dir);
    write_metadata(cfg, hash, dir);
    learn::Trainer trainer(cfg.env, cfg.ppo, cfg.train, hash);
    trainer.save_checkpoint(dir + "/checkpoint_iter0.bin");

    std::ofstream curve(dir + "/learning_curve.csv");
    curve << "# config_hash " << hash_hex(hash) << "\n";
    curve << "iteration,mean_reward,entropy,kl,policy_loss,vf_loss,kl_coeff,episodes\n";
    const int every = std::max(cfg.train.checkpoint_every, 1);
    trainer.run(cfg.train.iterations, [&](const learn::IterationLog& log) {
      curve << log.iteration << "," << fmt(log.mean_episode_reward) << "," << fmt(log.entropy)
            << "," << fmt(log.kl) << "," << fmt(log.policy_loss) << "," << fmt(log.vf_loss) << ","
            << fmt(log.kl_coeff) << "," << log.episodes_completed << "\n";
      curve.flush();
      if (log.iteration % every == 0) {
        trainer.save_checkpoint(dir + "/checkpoint_iter" + std::to_string(log.iteration) + ".bin");
      }
    });
    trainer.save_checkpoint(dir + "/checkpoint_final.bin");
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

EvalReport run_eval(const learn::ActorCritic& ac, const env::EnvConfig& env_cfg, int episodes,
                    uint64_t seed, bool deterministic) {
  EvalReport report;
  report.terrain_kind =
      env_cfg.terrain.mode == terrain::Params::Mode::flat ? "flat" : "rough";
  report.episodes = episodes;
  int success = 0, fell = 0, timeout = 0;
  double vx_sum = 0.0;
  for (int i = 0; i < episodes; ++i) {
    env::Env e(env_cfg);
    Rng rng(splitmix64(seed ^ static_cast<uint64_t>(i) * 0x51ed2701));
    const uint64_t ep_seed = splitmix64(seed + static_cast<uint64_t>(i));
    const learn::EpisodeResult res = learn::run_episode(e, ac, ep_seed, deterministic, rng);
    EvalEpisode rec;
    rec.index = i;
    rec.seed = ep_seed;
    rec.outcome = res.outcome;
    rec.total_reward = res.total_reward;
    rec.steps = res.steps;
    rec.mean_vx = res.mean_vx;
    rec.final_x = res.final_x;
    report.records.push_back(rec);
    switch (res.outcome) {
      case env::Outcome::success: ++success; break;
      case env::Outcome::fell: ++fell; break;
      default: ++timeout; break;
    }
    vx_sum += res.mean_vx;
  }
  report.success_rate = static_cast<double>(success) / episodes;
  report.falling_rate = static_cast<double>(fell) / episodes;
  report.timeout_rate = static_cast<double>(timeout) / episodes;
  report.mean_velocity = vx_sum / episodes;
  return report;
}

int cmd_eval(const EvalOptions& opt, std::string& err, EvalReport* report_out) {
  if (opt.episodes < 1) {
    err = "--episodes must be >= 1";
    return kExitUsage;
  }
  if (opt.terrain_kind != "flat" && opt.terrain_kind != "rough") {
    err = "--terrain must be flat or rough";
    return kExitUsage;
  }
  try {
    learn::LoadedPolicy lp = learn::load_policy(opt.checkpoint);
    if (lp.ac.policy.input_dim() != sense::kObservationDim) {
      err = "checkpoint observation dimension mismatch";
      return kExitRuntime;
    }
    RunConfig cfg;
    if (opt.config_path) {
      cfg = load_run_config(*opt.config_path);
      if (!hash_check(lp.info.config_hash, cfg, opt.force, err)) return kExitRuntime;
    }
    cfg.env.terrain.mode = opt.terrain_kind == "flat" ? terrain::Params::Mode::flat
                                                      : terrain::Params::Mode::rough;

    const EvalReport report = run_eval(lp.ac, cfg.env, opt.episodes, opt.seed, opt.deterministic);

    if (opt.out_dir) {
      fs::create_directories(*opt.out_dir);
      std::ofstream rp(*opt.out_dir + "/eval_report.txt");
      rp << "config_hash " << hash_hex(lp.info.config_hash) << "\n";
      rp << "terrain " << report.terrain_kind << "\n";
      rp << "episodes " << report.episodes << "\n";
      rp << "success_rate " << fmt(report.success_rate) << "\n";
      rp << "falling_rate " << fmt(report.falling_rate) << "\n";
      rp << "timeout_rate " << fmt(report.timeout_rate) << "\n";
      rp << "mean_velocity " << fmt(report.mean_velocity) << "\n";
      std::ofstream csv(*opt.out_dir + "/eval_episodes.csv");
      csv << "# config_hash " << hash_hex(lp.info.config_hash) << "\n";
      csv << "episode,seed,outcome,total_reward,steps,mean_vx,final_x\n";
      for (const EvalEpisode& r : report.records) {
        csv << r.index << "," << r.seed << "," << env::outcome_name(r.outcome) << ","
            << fmt(r.total_reward) << "," << r.steps << "," << fmt(r.mean_vx) << ","
            << fmt(r.final_x) << "\n";
      }
    }
    if (report_out) *report_out = report;
  } catch (const ConfigError& e) {
    err = e.what();
    return kExitUsage;
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

const std::vector<std::string>& replay_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"time", "hull_x", "hull_y", "hull_angle", "vx", "vy"};
    for (int j = 0; j < 8; ++j) c.push_back("cmd_" + std::to_string(j));
    for (int j = 0; j < 8; ++j) c.push_back("q_" + std::to_string(j));
    c.insert(c.end(), {"reward", "velocity_term", "torque_penalty", "accel_penalty", "fell"});
    for (int i = 0; i < 4; ++i) c.push_back("contact_" + std::to_string(i));
    return c;
  }();
  return cols;
}

int cmd_replay(const ReplayOptions& opt, std::string& err) {
  try {
    learn::LoadedPolicy lp = learn::load_policy(opt.checkpoint);
    RunConfig cfg;
    if (opt.config_path) {
      cfg = load_run_config(*opt.config_path);
      if (!hash_check(lp.info.config_hash, cfg, opt.force, err)) return kExitRuntime;
    }
    env::Env e(cfg.env);
    sense::Observation44 obs = e.reset(opt.seed);

    std::ofstream csv(opt.out_path);
    if (!csv) {
      err = "cannot write " + opt.out_path;
      return kExitRuntime;
    }
    csv << "# config_hash " << hash_hex(lp.info.config_hash) << "\n";
    const auto& cols = replay_columns();
    for (size_t i = 0; i < cols.size(); ++i) csv << (i ? "," : "") << cols[i];
    csv << "\n";

    Rng rng(0);
    double t = 0.0;
    while (!e.done()) {
      const learn::VectorXd obs_vec =
          Eigen::Map<const learn::VectorXd>(obs.data(), sense::kObservationDim);
      const learn::ActionSample s = learn::sample_action(lp.ac, obs_vec, rng, true);
      std::array<double, 8> action{};
      for (int j = 0; j < 8; ++j) action[j] = s.action[j];
      const env::StepResult sr = e.step(action);
      obs = sr.observation;
      t += e.config().control_dt();
      csv << fmt(t) << "," << fmt(sr.hull_position.x()) << "," << fmt(sr.hull_position.y()) << ","
          << fmt(sr.hull_angle) << "," << fmt(sr.vx) << "," << fmt(sr.vy);
      for (int j = 0; j < 8; ++j) csv << "," << fmt(sr.commanded_q[j]);
      for (int j = 0; j < 8; ++j) csv << "," << fmt(sr.joint_angles[j]);
      csv << "," << fmt(sr.reward) << "," << fmt(sr.breakdown.velocity_term) << ","
          << fmt(sr.breakdown.torque_penalty) << "," << fmt(sr.breakdown.accel_penalty) << ","
          << (sr.breakdown.fell ? 1 : 0);
      for (int i = 0; i < 4; ++i) csv << "," << sr.contact_bitmap[i];
      csv << "\n";
    }
  } catch (const ConfigError& e) {
    err = e.what();
    return kExitUsage;
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_terrain(const TerrainOptions& opt, std::string& err) {
  terrain::Params params;
  if (opt.mode == "flat") {
    params.mode = terrain::Params::Mode::flat;
  } else if (opt.mode == "rough") {
    params.mode = terrain::Params::Mode::rough;
  } else {
    err = "--terrain must be flat or rough";
    return kExitUsage;
  }
  if (opt.obstacles) params.obstacle_count = *opt.obstacles;
  if (opt.length) params.length = *opt.length;
  try {
    const terrain::Profile profile = terrain::generate(opt.seed, params);
    std::ofstream os(opt.out_path);
    if (!os) {
      err = "cannot write " + opt.out_path;
      return kExitRuntime;
    }
    os << terrain::serialize(profile);
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_inspect(const std::string& checkpoint, std::string& out, std::string& err) {
  try {
    const learn::CheckpointInfo info = learn::inspect_checkpoint(checkpoint);
    std::ostringstream os;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, info.config_hash);
    os << "version " << info.version << "\n";
    os << "config_hash " << buf << "\n";
    os << "iteration " << info.iteration << "\n";
    os << "policy_sizes";
    for (int s : info.policy_sizes) os << " " << s;
    os << "\nvalue_sizes";
    for (int s : info.value_sizes) os << " " << s;
    os << "\nparam_count " << info.param_count << "\n";
    os << "kl_coeff " << fmt(info.kl_coeff) << "\n";
    out = os.str();
  } catch (const std::exception& e) {
    err = e.what();
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace ql::harness
