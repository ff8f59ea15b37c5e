#include "eosim/marl/batch.hpp"

#include <cmath>
#include <string>

namespace eosim::marl {

void TrajectoryBatch::validate() const {
  const std::size_t T = size();
  const auto fail = [](const std::string& m) { throw std::invalid_argument("trajectory batch: " + m); };
  if (global_states.size() != T * state_size) fail("global state table misaligned");
  if (dones.size() != T || truncated.size() != T || joint_log_probs.size() != T) fail("per-step flags misaligned");
  if (T > 0 && !dones.back()) fail("last row must close an episode");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    if (a.observations.size() != T * a.obs_size || a.actions.size() != T || a.log_probs.size() != T)
      fail("agent " + std::to_string(i) + " rows misaligned");
    for (std::size_t t = 0; t < T; ++t) {
      if (!std::isfinite(a.log_probs[t])) fail("non-finite behaviour log-prob at row " + std::to_string(t));
      if (a.actions[t] < 0 || static_cast<std::size_t>(a.actions[t]) >= a.action_size)
        fail("action out of range at row " + std::to_string(t));
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    if (truncated[t] && !dones[t]) fail("truncated row that does not end an episode");
    if (!std::isfinite(rewards[t])) fail("non-finite reward at row " + std::to_string(t));
  }
  std::size_t n_trunc = 0;
  for (auto f : truncated) n_trunc += f;
  if (tails.size() != n_trunc) fail("missing bootstrap state for a truncated row");
  for (const auto& [t, s] : tails)
    if (t >= T || !truncated[t] || s.size() != state_size) fail("bad bootstrap entry");
}

void TrajectoryBatch::append(const TrajectoryBatch& o) {
  if (o.state_size != state_size || o.agents.size() != agents.size())
    throw std::invalid_argument("trajectory batch: appending a batch of different shape");
  const std::size_t offset = size();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    auto& a = agents[i];
    const auto& b = o.agents[i];
    if (a.obs_size != b.obs_size || a.action_size != b.action_size)
      throw std::invalid_argument("trajectory batch: agent shapes differ");
    a.observations.insert(a.observations.end(), b.observations.begin(), b.observations.end());
    a.actions.insert(a.actions.end(), b.actions.begin(), b.actions.end());
    a.log_probs.insert(a.log_probs.end(), b.log_probs.begin(), b.log_probs.end());
  }
  global_states.insert(global_states.end(), o.global_states.begin(), o.global_states.end());
  rewards.insert(rewards.end(), o.rewards.begin(), o.rewards.end());
  dones.insert(dones.end(), o.dones.begin(), o.dones.end());
  truncated.insert(truncated.end(), o.truncated.begin(), o.truncated.end());
  joint_log_probs.insert(joint_log_probs.end(), o.joint_log_probs.begin(), o.joint_log_probs.end());
  for (const auto& [t, s] : o.tails) tails.emplace_back(t + offset, s);
}

TrajectoryBatch make_batch(std::span<const std::size_t> obs_sizes, std::span<const std::size_t> action_sizes,
                           std::size_t state_size) {
  if (obs_sizes.size() != action_sizes.size()) throw std::invalid_argument("make_batch: shape lists differ");
  TrajectoryBatch b;
  b.state_size = state_size;
  for (std::size_t i = 0; i < obs_sizes.size(); ++i) {
    AgentTrajectory a;
    a.obs_size = obs_sizes[i];
    a.action_size = action_sizes[i];
    b.agents.push_back(std::move(a));
  }
  return b;
}

}  // namespace eosim::marl
