#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "eosim/marl/config.hpp"
#include "eosim/rollout/rollout.hpp"
#include "eosim/scenario.hpp"

namespace eosim::experiment {

struct ExperimentConfig {
  marl::Algorithm algo = marl::Algorithm::kPpo;
  mission::ClusterKind cluster = mission::ClusterKind::kSingle;
  mission::ScenarioConfig scenario = mission::scenario_preset("easy");
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  std::uint64_t total_steps = 100000;  // env steps per seed
  rollout::RolloutConfig rollout;
  marl::AlgoConfig algo_config;
  std::size_t checkpoint_every = 10;  // updates
  std::string output_dir;             // empty: derived from algo/cluster/scenario
  std::string data_dir;               // empty: bundled data
  bool record_wall_time = false;      // wall_s column stays 0 otherwise

  // Throws std::invalid_argument (e.g. ppo with a multi-satellite cluster).
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Missing keys keep defaults; unknown keys are rejected. "scenario" may be a
// preset name or an object.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

// FNV-1a over the canonical JSON of everything that shapes the learning
// result; output location, step budget, seed list, worker count and timing
// are left out so a run can be extended or relocated.
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hash_hex(std::uint64_t h);

std::string default_output_name(const ExperimentConfig& c);
// EOSIM_OUTPUT_ROOT prefixes relative output paths when set.
std::string resolve_output_dir(const ExperimentConfig& c);
std::string resolve_data_dir(const ExperimentConfig& c);

// Builds the environment described by the config.
rollout::EnvSpec make_env(const ExperimentConfig& c);
rollout::EnvSpec make_env(const ExperimentConfig& c, const mission::ScenarioConfig& scenario);

// A preset name or a path to a scenario JSON file.
mission::ScenarioConfig resolve_scenario(const std::string& name_or_path);

}  // namespace eosim::experiment
