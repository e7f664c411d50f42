#include "harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ql::harness {

namespace {

template <typename T>
void get(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

reward::Mode parse_reward_mode(const std::string& s) {
  if (s == "static") return reward::Mode::static_target;
  if (s == "static_2d") return reward::Mode::static_2d_target;
  if (s == "drs") return reward::Mode::drs;
  if (s == "baseline") return reward::Mode::baseline;
  throw ConfigError("unknown reward mode '" + s + "' (static|static_2d|drs|baseline)");
}

const char* reward_mode_name(reward::Mode m) {
  switch (m) {
    case reward::Mode::static_target: return "static";
    case reward::Mode::static_2d_target: return "static_2d";
    case reward::Mode::drs: return "drs";
    case reward::Mode::baseline: return "baseline";
  }
  return "?";
}

void parse_pair(const YAML::Node& node, const char* key, double& lo, double& hi) {
  if (node && node[key]) {
    lo = node[key][0].as<double>();
    hi = node[key][1].as<double>();
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text, const std::string& origin) {
  RunConfig cfg;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  try {
    get(root, "experiment", cfg.experiment);
    get(root, "seed", cfg.seed);
    get(root, "output_dir", cfg.output_dir);

    const YAML::Node e = root["env"];
    if (e) {
      get(e, "control_hz", cfg.env.control_hz);
      get(e, "physics_hz", cfg.env.physics_hz);
      get(e, "max_control_steps", cfg.env.max_control_steps);
      get(e, "spawn_push_range", cfg.env.spawn_push_range);
      get(e, "spawn_x", cfg.env.spawn_x);

      const YAML::Node t = e["terrain"];
      if (t) {
        std::string mode = "rough";
        get(t, "mode", mode);
        if (mode == "flat") {
          cfg.env.terrain.mode = terrain::Params::Mode::flat;
        } else if (mode == "rough") {
          cfg.env.terrain.mode = terrain::Params::Mode::rough;
        } else {
          throw ConfigError("unknown terrain mode '" + mode + "' (flat|rough)");
        }
        get(t, "length", cfg.env.terrain.length);
        get(t, "obstacles", cfg.env.terrain.obstacle_count);
        get(t, "spawn_flat", cfg.env.terrain.spawn_flat);
        parse_pair(t, "gap_width", cfg.env.terrain.gap_width_min, cfg.env.terrain.gap_width_max);
        parse_pair(t, "stump_width", cfg.env.terrain.stump_width_min, cfg.env.terrain.stump_width_max);
        parse_pair(t, "stump_height", cfg.env.terrain.stump_height_min, cfg.env.terrain.stump_height_max);
        get(t, "rough_step", cfg.env.terrain.rough_step);
      }

      const YAML::Node r = e["reward"];
      if (r) {
        std::string mode = "drs";
        get(r, "mode", mode);
        cfg.env.reward.mode = parse_reward_mode(mode);
        get(r, "v_star_x", cfg.env.reward.v_star_x);
        get(r, "v_star_y", cfg.env.reward.v_star_y);
        get(r, "p_fall", cfg.env.reward.p_fall);
        get(r, "c1", cfg.env.reward.c1);
        get(r, "c2", cfg.env.reward.c2);
        get(r, "c3", cfg.env.reward.c3);
        parse_pair(r, "k1", cfg.env.reward.k1_contact, cfg.env.reward.k1_swing);
        parse_pair(r, "k2", cfg.env.reward.k2_contact, cfg.env.reward.k2_swing);
        get(r, "penalties_subtract", cfg.env.reward.penalties_subtract);
      }

      const YAML::Node b = e["blueprint"];
      if (b) {
        get(b, "body_length", cfg.env.blueprint.body_length);
        get(b, "body_mass", cfg.env.blueprint.body_mass);
        get(b, "upper_leg_length", cfg.env.blueprint.upper_leg_length);
        get(b, "lower_leg_length", cfg.env.blueprint.lower_leg_length);
        get(b, "upper_leg_mass", cfg.env.blueprint.upper_leg_mass);
        get(b, "lower_leg_mass", cfg.env.blueprint.lower_leg_mass);
        get(b, "friction", cfg.env.blueprint.friction);
        get(b, "torque_max", cfg.env.blueprint.torque_max);
      }
    }

    const YAML::Node p = root["ppo"];
    if (p) {
      get(p, "lr", cfg.ppo.lr);
      get(p, "gamma", cfg.ppo.gamma);
      get(p, "lambda", cfg.ppo.lambda);
      get(p, "clip", cfg.ppo.clip);
      get(p, "vf_clip", cfg.ppo.vf_clip);
      get(p, "vf_coeff", cfg.ppo.vf_coeff);
      get(p, "entropy_coeff", cfg.ppo.entropy_coeff);
      get(p, "kl_coeff", cfg.ppo.kl_coeff);
      get(p, "kl_target", cfg.ppo.kl_target);
      get(p, "minibatch", cfg.ppo.minibatch);
      get(p, "sgd_iters", cfg.ppo.sgd_iters);
    }

    const YAML::Node tr = root["train"];
    if (tr) {
      get(tr, "iterations", cfg.train.iterations);
      get(tr, "num_envs", cfg.train.num_envs);
      get(tr, "fragment_len", cfg.train.fragment_len);
      get(tr, "batch_size", cfg.train.batch_size);
      get(tr, "checkpoint_every", cfg.train.checkpoint_every);
      if (tr["hidden"]) cfg.train.hidden = tr["hidden"].as<std::vector<int>>();
    }
    cfg.train.seed = cfg.seed;
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }

  if (cfg.env.physics_hz % cfg.env.control_hz != 0) {
    throw ConfigError(origin + ": physics_hz must be divisible by control_hz");
  }
  if (cfg.train.batch_size % cfg.train.fragment_len != 0) {
    throw ConfigError(origin + ": batch_size must be a multiple of fragment_len");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str(), path);
}

std::string RunConfig::resolved_output_dir() const {
  if (!output_dir.empty()) return output_dir;
  const char* root = std::getenv("QUADLOCO_OUT_ROOT");
  return std::string(root ? root : "runs") + "/" + experiment;
}

std::string canonical_serialize(const RunConfig& cfg) {
  char buf[256];
  std::ostringstream os;
  auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%s=%.17g\n", key, v);
    os << buf;
  };
  os << "experiment=" << cfg.experiment << "\n";
  os << "seed=" << cfg.seed << "\n";
  os << "env.control_hz=" << cfg.env.control_hz << "\n";
  os << "env.physics_hz=" << cfg.env.physics_hz << "\n";
  os << "env.max_control_steps=" << cfg.env.max_control_steps << "\n";
  emit("env.spawn_push_range", cfg.env.spawn_push_range);
  emit("env.spawn_x", cfg.env.spawn_x);
  os << "terrain.mode=" << (cfg.env.terrain.mode == terrain::Params::Mode::flat ? "flat" : "rough")
     << "\n";
  emit("terrain.length", cfg.env.terrain.length);
  os << "terrain.obstacles=" << cfg.env.terrain.obstacle_count << "\n";
  emit("terrain.spawn_flat", cfg.env.terrain.spawn_flat);
  emit("terrain.gap_width_min", cfg.env.terrain.gap_width_min);
  emit("terrain.gap_width_max", cfg.env.terrain.gap_width_max);
  emit("terrain.stump_width_min", cfg.env.terrain.stump_width_min);
  emit("terrain.stump_width_max", cfg.env.terrain.stump_width_max);
  emit("terrain.stump_height_min", cfg.env.terrain.stump_height_min);
  emit("terrain.stump_height_max", cfg.env.terrain.stump_height_max);
  emit("terrain.rough_step", cfg.env.terrain.rough_step);
  os << "reward.mode=" << reward_mode_name(cfg.env.reward.mode) << "\n";
  emit("reward.v_star_x", cfg.env.reward.v_star_x);
  emit("reward.v_star_y", cfg.env.reward.v_star_y);
  emit("reward.p_fall", cfg.env.reward.p_fall);
  emit("reward.c1", cfg.env.reward.c1);
  emit("reward.c2", cfg.env.reward.c2);
  emit("reward.c3", cfg.env.reward.c3);
  emit("reward.k1_contact", cfg.env.reward.k1_contact);
  emit("reward.k1_swing", cfg.env.reward.k1_swing);
  emit("reward.k2_contact", cfg.env.reward.k2_contact);
  emit("reward.k2_swing", cfg.env.reward.k2_swing);
  os << "reward.penalties_subtract=" << (cfg.env.reward.penalties_subtract ? 1 : 0) << "\n";
  emit("blueprint.body_length", cfg.env.blueprint.body_length);
  emit("blueprint.body_mass", cfg.env.blueprint.body_mass);
  emit("blueprint.upper_leg_length", cfg.env.blueprint.upper_leg_length);
  emit("blueprint.lower_leg_length", cfg.env.blueprint.lower_leg_length);
  emit("blueprint.friction", cfg.env.blueprint.friction);
  emit("blueprint.torque_max", cfg.env.blueprint.torque_max);
  emit("ppo.lr", cfg.ppo.lr);
  emit("ppo.gamma", cfg.ppo.gamma);
  emit("ppo.lambda", cfg.ppo.lambda);
  emit("ppo.clip", cfg.ppo.clip);
  emit("ppo.vf_clip", cfg.ppo.vf_clip);
  emit("ppo.vf_coeff", cfg.ppo.vf_coeff);
  emit("ppo.entropy_coeff", cfg.ppo.entropy_coeff);
  emit("ppo.kl_coeff", cfg.ppo.kl_coeff);
  emit("ppo.kl_target", cfg.ppo.kl_target);
  os << "ppo.minibatch=" << cfg.ppo.minibatch << "\n";
  os << "ppo.sgd_iters=" << cfg.ppo.sgd_iters << "\n";
  os << "train.iterations=" << cfg.train.iterations << "\n";
  os << "train.num_envs=" << cfg.train.num_envs << "\n";
  os << "train.fragment_len=" << cfg.train.fragment_len << "\n";
  os << "train.batch_size=" << cfg.train.batch_size << "\n";
  os << "train.hidden=";
  for (size_t i = 0; i < cfg.train.hidden.size(); ++i) {
    os << (i ? "," : "") << cfg.train.hidden[i];
  }
  os << "\n";
  return os.str();
}

uint64_t config_hash(const RunConfig& cfg) {
  const std::string s = canonical_serialize(cfg);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ql::harness
