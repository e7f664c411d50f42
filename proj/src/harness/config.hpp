#pragma once

#include <stdexcept>
#include <string>

#include "env/env.hpp"
#include "learn/trainer.hpp"

namespace ql::harness {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string experiment = "run";
  uint64_t seed = 0;
  std::string output_dir;  // empty: resolved from QUADLOCO_OUT_ROOT (or ./runs)
  env::EnvConfig env;
  learn::PpoConfig ppo;
  learn::TrainConfig train;

  std::string resolved_output_dir() const;
};

// throws ConfigError with a file:line anchor where yaml-cpp provides one
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& yaml_text, const std::string& origin = "<string>");

// canonical text form; equal configs serialize identically
std::string canonical_serialize(const RunConfig& cfg);
uint64_t config_hash(const RunConfig& cfg);  // FNV-1a over the canonical form

}  // namespace ql::harness
