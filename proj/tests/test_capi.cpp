#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "quadloco.h"

namespace fs = std::filesystem;

TEST_CASE("version string is set") {
  CHECK(ql_version() != nullptr);
  CHECK(std::strlen(ql_version()) > 0);
}

TEST_CASE("environment handle: reset and step through the C API") {
  char err[256] = {0};
  ql_env* env = ql_env_create(nullptr, err, sizeof(err));
  REQUIRE(env != nullptr);

  double obs[QL_OBS_DIM];
  REQUIRE(ql_env_reset(env, 42, obs) == QL_OK);
  for (double v : obs) CHECK(std::isfinite(v));

  double obs2[QL_OBS_DIM];
  REQUIRE(ql_env_reset(env, 42, obs2) == QL_OK);
  for (int i = 0; i < QL_OBS_DIM; ++i) CHECK(obs[i] == obs2[i]);

  double action[QL_ACT_DIM] = {0};
  double reward = 0.0;
  int done = 0, outcome = -1;
  for (int i = 0; i < 10 && !done; ++i) {
    REQUIRE(ql_env_step(env, action, obs, &reward, &done, &outcome, err, sizeof(err)) == QL_OK);
  }
  CHECK((outcome == QL_RUNNING || outcome == QL_FELL));
  ql_env_destroy(env);

  CHECK(ql_env_reset(nullptr, 0, obs) == QL_ERR_USAGE);
}

TEST_CASE("bad config path is a creation error") {
  char err[256] = {0};
  ql_env* env = ql_env_create("/nope/missing.yaml", err, sizeof(err));
  CHECK(env == nullptr);
  CHECK(std::strlen(err) > 0);
}

TEST_CASE("command wrappers validate usage and report errors") {
  char err[256] = {0};
  CHECK(ql_train(nullptr, err, sizeof(err)) == QL_ERR_USAGE);

  ql_eval_opts eopt{};
  eopt.checkpoint = "/nope/ckpt.bin";
  eopt.terrain = "flat";
  eopt.episodes = 1;
  eopt.deterministic = 1;
  ql_eval_report report{};
  err[0] = '\0';
  CHECK(ql_eval(&eopt, &report, err, sizeof(err)) == QL_ERR_RUNTIME);
  CHECK(std::strlen(err) > 0);

  CHECK(ql_replay(nullptr, 0, nullptr, nullptr, 0, err, sizeof(err)) == QL_ERR_USAGE);
  CHECK(ql_inspect_checkpoint("/nope/ckpt.bin", nullptr, 0, err, sizeof(err)) == QL_ERR_RUNTIME);
}

TEST_CASE("terrain generation through the C API") {
  const fs::path out = fs::temp_directory_path() / "ql_capi_terrain.txt";
  char err[256] = {0};
  REQUIRE(ql_terrain(3, "rough", -1, -1.0, out.string().c_str(), err, sizeof(err)) == QL_OK);
  std::ifstream is(out);
  std::string first;
  std::getline(is, first);
  CHECK(first == "# quadloco terrain v1");
  fs::remove(out);

  CHECK(ql_terrain(3, "hilly", -1, -1.0, out.string().c_str(), err, sizeof(err)) == QL_ERR_USAGE);
}
