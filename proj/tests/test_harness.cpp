#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "harness/commands.hpp"

using namespace ql;
using namespace ql::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// tiny but complete run config for fast harness tests
std::string tiny_yaml(const std::string& out_dir, uint64_t seed) {
  std::ostringstream os;
  os << "experiment: tiny\n"
     << "seed: " << seed << "\n"
     << "output_dir: " << out_dir << "\n"
     << "env:\n"
     << "  max_control_steps: 60\n"
     << "  terrain: {mode: flat, obstacles: 0}\n"
     << "  reward: {mode: drs, v_star_x: 2.0}\n"
     << "train:\n"
     << "  iterations: 2\n"
     << "  num_envs: 1\n"
     << "  fragment_len: 30\n"
     << "  batch_size: 120\n"
     << "  hidden: [8, 8]\n";
  return os.str();
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides and validation") {
  const RunConfig cfg = parse_run_config("experiment: x\nseed: 9\n");
  CHECK(cfg.experiment == "x");
  CHECK(cfg.seed == 9);
  CHECK(cfg.env.control_hz == 25);
  CHECK(cfg.ppo.lr == 5e-5);

  const RunConfig full = parse_run_config(
      "env:\n  reward: {mode: static_2d, v_star_x: 2.0, v_star_y: 0.0}\n"
      "  terrain: {mode: flat, gap_width: [3, 4]}\n"
      "ppo: {clip: 0.2}\n");
  CHECK(full.env.reward.mode == reward::Mode::static_2d_target);
  CHECK(full.env.terrain.gap_width_min == 3.0);
  CHECK(full.env.terrain.gap_width_max == 4.0);
  CHECK(full.ppo.clip == 0.2);

  CHECK_THROWS_AS(parse_run_config("env:\n  reward: {mode: bogus}\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("env: {control_hz: 30}\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("train: {fragment_len: 7, batch_size: 100}\n"), ConfigError);

  // malformed YAML errors carry an origin:line anchor
  try {
    parse_run_config("env: [unclosed\n", "conf.yaml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("conf.yaml:") == 0);
  }
}

TEST_CASE("canonical serialization is stable and hash-sensitive") {
  const RunConfig a = parse_run_config("seed: 1\n");
  const RunConfig b = parse_run_config("seed: 1\n");
  CHECK(canonical_serialize(a) == canonical_serialize(b));
  CHECK(config_hash(a) == config_hash(b));
  const RunConfig c = parse_run_config("seed: 1\nenv:\n  reward: {v_star_x: 2.0}\n");
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("cmd_train: missing config file exits with usage code and names the path") {
  TrainOptions opt;
  opt.config_path = "/definitely/not/here.yaml";
  std::string err;
  CHECK(cmd_train(opt, err) == kExitUsage);
  CHECK(err.find("/definitely/not/here.yaml") != std::string::npos);
}

TEST_CASE("cmd_train: zero iterations produce only the initial checkpoint") {
  TempDir tmp("ql_train0");
  const std::string cfg_path = tmp.file("run.yaml");
  std::ofstream(cfg_path) << tiny_yaml(tmp.file("out"), 1);
  TrainOptions opt;
  opt.config_path = cfg_path;
  opt.iterations = 0;
  std::string err;
  REQUIRE(cmd_train(opt, err) == kExitOk);
  CHECK(fs::exists(tmp.file("out/checkpoint_iter0.bin")));
  CHECK(fs::exists(tmp.file("out/run_metadata.txt")));
  const std::string curve = slurp(tmp.file("out/learning_curve.csv"));
  CHECK(curve.rfind("# config_hash ", 0) == 0);
  CHECK(curve.substr(curve.find('\n') + 1) ==
        "iteration,mean_reward,entropy,kl,policy_loss,vf_loss,kl_coeff,episodes\n");
  const std::string meta = slurp(tmp.file("out/run_metadata.txt"));
  CHECK(meta.find("config_hash") != std::string::npos);
}

TEST_CASE("cmd_train: same config and seed give a byte-identical learning curve") {
  TempDir tmp("ql_train_det");
  std::string curves[2];
  for (int r = 0; r < 2; ++r) {
    const std::string out = tmp.file("out" + std::to_string(r));
    const std::string cfg_path = tmp.file("run" + std::to_string(r) + ".yaml");
    std::ofstream(cfg_path) << tiny_yaml(out, 5);
    TrainOptions opt;
    opt.config_path = cfg_path;
    std::string err;
    REQUIRE(cmd_train(opt, err) == kExitOk);
    curves[r] = slurp(out + "/learning_curve.csv");
  }
  CHECK(curves[0] == curves[1]);
  CHECK(curves[0].find('\n') != curves[0].rfind('\n'));  // more than the header
}

TEST_CASE("cmd_terrain: defaults list five obstacles and round-trip") {
  TempDir tmp("ql_terrain");
  TerrainOptions opt;
  opt.seed = 77;
  opt.out_path = tmp.file("t.txt");
  std::string err;
  REQUIRE(cmd_terrain(opt, err) == kExitOk);
  const std::string text = slurp(opt.out_path);
  size_t count = 0, pos = 0;
  while ((pos = text.find("obstacle ", pos)) != std::string::npos) {
    ++count;
    pos += 9;
  }
  CHECK(count == 5);
  const terrain::Profile p = terrain::parse(text);
  CHECK(terrain::serialize(p) == text);

  // flat with no obstacles is a two-vertex polyline
  TerrainOptions flat;
  flat.mode = "flat";
  flat.obstacles = 0;
  flat.out_path = tmp.file("flat.txt");
  REQUIRE(cmd_terrain(flat, err) == kExitOk);
  const terrain::Profile fp = terrain::parse(slurp(flat.out_path));
  CHECK(fp.polyline.size() == 2);

  TerrainOptions bad;
  bad.mode = "hilly";
  bad.out_path = tmp.file("x.txt");
  CHECK(cmd_terrain(bad, err) == kExitUsage);
}

TEST_CASE("eval, replay and inspect on a fresh checkpoint") {
  TempDir tmp("ql_evalflow");
  const std::string cfg_path = tmp.file("run.yaml");
  std::ofstream(cfg_path) << tiny_yaml(tmp.file("out"), 3);
  TrainOptions topt;
  topt.config_path = cfg_path;
  topt.iterations = 0;
  std::string err;
  REQUIRE(cmd_train(topt, err) == kExitOk);
  const std::string ckpt = tmp.file("out/checkpoint_final.bin");
  REQUIRE(fs::exists(ckpt));

  EvalOptions eopt;
  eopt.checkpoint = ckpt;
  eopt.terrain_kind = "rough";
  eopt.episodes = 4;
  eopt.seed = 11;
  eopt.config_path = cfg_path;
  eopt.out_dir = tmp.file("eval");
  EvalReport r1, r2;
  REQUIRE(cmd_eval(eopt, err, &r1) == kExitOk);
  REQUIRE(cmd_eval(eopt, err, &r2) == kExitOk);
  CHECK(r1.success_rate + r1.falling_rate + r1.timeout_rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.success_rate == r2.success_rate);
  CHECK(r1.falling_rate == r2.falling_rate);
  CHECK(r1.mean_velocity == r2.mean_velocity);
  REQUIRE(r1.records.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(r1.records[i].outcome == r2.records[i].outcome);
  CHECK(fs::exists(tmp.file("eval/eval_report.txt")));
  CHECK(fs::exists(tmp.file("eval/eval_episodes.csv")));

  // usage validation
  EvalOptions bad = eopt;
  bad.episodes = 0;
  CHECK(cmd_eval(bad, err) == kExitUsage);
  bad = eopt;
  bad.terrain_kind = "lava";
  CHECK(cmd_eval(bad, err) == kExitUsage);

  // hash guard: a different config is refused without force
  const std::string cfg2 = tmp.file("other.yaml");
  std::ofstream(cfg2) << tiny_yaml(tmp.file("out2"), 999);
  EvalOptions mism = eopt;
  mism.config_path = cfg2;
  CHECK(cmd_eval(mism, err) == kExitRuntime);
  CHECK(err.find("hash") != std::string::npos);
  mism.force = true;
  CHECK(cmd_eval(mism, err) == kExitOk);

  // replay: documented schema width and reproducibility
  ReplayOptions ropt;
  ropt.checkpoint = ckpt;
  ropt.seed = 21;
  ropt.config_path = cfg_path;
  ropt.out_path = tmp.file("replay1.csv");
  REQUIRE(cmd_replay(ropt, err) == kExitOk);
  ropt.out_path = tmp.file("replay2.csv");
  REQUIRE(cmd_replay(ropt, err) == kExitOk);
  const std::string rp1 = slurp(tmp.file("replay1.csv"));
  CHECK(rp1 == slurp(tmp.file("replay2.csv")));
  CHECK(rp1.rfind("# config_hash ", 0) == 0);
  const size_t header_start = rp1.find('\n') + 1;
  const std::string header = rp1.substr(header_start, rp1.find('\n', header_start) - header_start);
  const size_t cols = std::count(header.begin(), header.end(), ',') + 1;
  CHECK(cols == replay_columns().size());

  std::string text;
  REQUIRE(cmd_inspect(ckpt, text, err) == kExitOk);
  CHECK(text.find("policy_sizes 44") != std::string::npos);
  CHECK(cmd_inspect(tmp.file("nope.bin"), text, err) == kExitRuntime);
}
