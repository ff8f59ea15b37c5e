#pragma once

// Trajectory collection from many seeded environment instances, policy
// evaluation and metric aggregation.

#include <cstdint>
#include <memory>
#include <vector>

#include "eosim/environment.hpp"
#include "eosim/marl/batch.hpp"
#include "eosim/marl/policy.hpp"

namespace eosim::rollout {

struct RolloutConfig {
  std::size_t num_envs = 20;
  std::size_t steps_per_env = 0;  // 0: one episode length
  std::size_t eval_episodes = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // threads used for collection

  void validate() const;
};

struct EnvSpec {
  std::shared_ptr<const mission::MissionWorld> world;
  mission::ScenarioConfig scenario;

  std::size_t episode_steps() const;
};

enum class ActionMode { kSample, kArgmax, kUniformRandom };

// Per-episode outcome.
struct EpisodeStats {
  double total_return = 0.0;
  std::vector<double> agent_returns;  // sum of each agent's reward components
  std::size_t captures = 0;           // capture attempts inside an open window
  std::size_t unique_captures = 0;
  double downlinked_GB = 0.0;
  double generated_GB = 0.0;
  bool failed = false;  // any agent failed
  double min_battery_fraction = 1.0;
  std::size_t steps = 0;
};

EpisodeStats episode_stats(const mission::EpisodeLog& log);

struct MetricSample {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::size_t episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;  // population std over completed episodes
  std::vector<double> agent_returns;  // means
  double captures = 0.0;
  double unique_captures = 0.0;
  double downlinked_GB = 0.0;
  double failure_rate = 0.0;
  double min_battery_fraction = 0.0;  // lowest over all episodes
  double wall_s = 0.0;
};

MetricSample aggregate(const std::vector<EpisodeStats>& episodes, std::size_t num_agents, std::uint64_t step,
                       std::uint64_t seed);

struct CollectResult {
  marl::TrajectoryBatch batch;
  std::vector<EpisodeStats> completed;  // episodes that reached their end
  std::size_t env_steps = 0;
};

// Runs every env for steps_per_env steps. Env e uses streams derived from
// (seed, update, e) only; episodes that run out of steps are marked truncated
// with the next global state kept for bootstrapping. Rows are merged in env
// index order.
CollectResult collect_rollouts(const marl::PolicySet& policies, const EnvSpec& env, const RolloutConfig& cfg,
                               std::uint64_t update_index, ActionMode mode = ActionMode::kSample);

// Shapes a policy set needs for this env.
std::vector<marl::AgentShape> agent_shapes(const EnvSpec& env);
std::size_t global_state_size(const EnvSpec& env);

struct EvalResult {
  MetricSample metrics;
  std::vector<EpisodeStats> episodes;
  std::vector<mission::EpisodeLog> logs;  // filled when requested
};

// No learning. Episode k uses env seed derive(seed, k). A null policy set is
// only valid with kUniformRandom. repeat_first_episode reuses episode 0's env
// and action seeds for every episode (identical initial conditions).
EvalResult evaluate_policy(const marl::PolicySet* policies, const EnvSpec& env, std::size_t episodes,
                           std::uint64_t seed, ActionMode mode, bool keep_logs = false,
                           bool repeat_first_episode = false);

// Action choice for one agent; returns the action and its log-probability.
std::pair<int, double> select_action(const marl::PolicySet* policies, std::size_t agent,
                                     std::span<const double> obs, std::size_t action_size, ActionMode mode,
                                     Rng& rng);

// Steps a fresh env through the logged actions and checks that the new log
// matches the old one exactly. Returns the replayed log; throws
// ReplayMismatch naming the first differing step.
class ReplayMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
mission::EpisodeLog replay_episode(const EnvSpec& env, const mission::EpisodeLog& log);
bool logs_identical(const mission::EpisodeLog& a, const mission::EpisodeLog& b, std::string* where = nullptr);

}  // namespace eosim::rollout
