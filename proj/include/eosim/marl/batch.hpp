#pragma once

// On-policy samples for one update. Rows are time-aligned across agents: row t
// of every agent and of the global-state table belong to the same env step.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eosim::marl {

// Read-only view of a row-major table.
struct Rows {
  std::span<const double> data;
  std::size_t width = 0;

  std::size_t size() const { return width == 0 ? 0 : data.size() / width; }
  std::span<const double> operator[](std::size_t t) const { return data.subspan(t * width, width); }
};

struct AgentTrajectory {
  std::size_t obs_size = 0;
  std::size_t action_size = 0;
  std::vector<double> observations;  // T x obs_size
  std::vector<int> actions;
  std::vector<double> log_probs;  // behaviour policy

  Rows obs() const { return {observations, obs_size}; }
};

struct TrajectoryBatch {
  std::size_t state_size = 0;
  std::vector<AgentTrajectory> agents;
  std::vector<double> global_states;  // T x state_size, state before the step
  std::vector<double> rewards;        // shared by all agents
  std::vector<std::uint8_t> dones;    // an episode ends after this row
  std::vector<std::uint8_t> truncated;  // ended by the step budget, not by the task
  // For truncated rows: the state after the step, for bootstrapping.
  std::vector<std::pair<std::size_t, std::vector<double>>> tails;
  std::vector<double> joint_log_probs;  // sum of the agents' log-probs

  std::size_t size() const { return rewards.size(); }
  std::size_t num_agents() const { return agents.size(); }
  Rows states() const { return {global_states, state_size}; }

  // Throws std::invalid_argument on misaligned or non-finite contents.
  void validate() const;
  // Appends rows of `other` (same shapes).
  void append(const TrajectoryBatch& other);
};

// Empty batch with the given shapes.
TrajectoryBatch make_batch(std::span<const std::size_t> obs_sizes, std::span<const std::size_t> action_sizes,
                           std::size_t state_size);

}  // namespace eosim::marl
