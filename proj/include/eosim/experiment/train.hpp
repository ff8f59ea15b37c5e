#pragma once

// The collect -> update loop for one seed, and the metrics CSV.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "eosim/experiment/checkpoint.hpp"
#include "eosim/experiment/config.hpp"
#include "eosim/marl/update.hpp"
#include "eosim/rollout/rollout.hpp"

namespace eosim::experiment {

class Trainer {
 public:
  // Fresh run: parameters drawn from the seed.
  Trainer(const ExperimentConfig& cfg, std::uint64_t seed, rollout::EnvSpec env);
  // Continues from a checkpoint; throws if it belongs to another config.
  Trainer(const ExperimentConfig& cfg, const Checkpoint& ckpt, rollout::EnvSpec env);

  struct Report {
    rollout::MetricSample metrics;  // completed training episodes of this update
    marl::UpdateMetrics update;
  };
  Report update();

  bool finished() const { return global_step_ >= cfg_.total_steps; }
  std::uint64_t global_step() const { return global_step_; }
  std::uint64_t update_index() const { return update_index_; }
  std::uint64_t seed() const { return seed_; }
  const marl::PolicySet& policies() const { return policies_; }
  const rollout::EnvSpec& env() const { return env_; }
  Checkpoint checkpoint() const;

 private:
  ExperimentConfig cfg_;
  std::uint64_t seed_ = 0;
  rollout::EnvSpec env_;
  marl::PolicySet policies_;
  Rng update_rng_;
  std::uint64_t global_step_ = 0;
  std::uint64_t update_index_ = 0;
};

std::string metrics_header(std::size_t num_agents);
std::string metrics_row(const rollout::MetricSample& m);

// Final greedy evaluation used by train.
rollout::EvalResult final_evaluation(const ExperimentConfig& cfg, const marl::PolicySet& ps,
                                     const rollout::EnvSpec& env, std::uint64_t seed);
std::uint64_t eval_seed_for(std::uint64_t seed);

}  // namespace eosim::experiment
