#pragma once

// Actor/critic parameters for a team of agents, with optimiser state.

#include <vector>

#include "eosim/nn/adam.hpp"
#include "eosim/nn/mlp.hpp"
#include "eosim/rng.hpp"

namespace eosim::marl {

struct AgentShape {
  std::size_t obs_size = 0;
  std::size_t action_size = 0;
};

struct PolicySet {
  std::vector<nn::Mlp> actor_nets;
  std::vector<nn::ParamVector> actors;
  std::vector<nn::AdamState> actor_opt;
  nn::Mlp critic_net;  // every critic shares the architecture
  std::vector<nn::ParamVector> critics;
  std::vector<nn::AdamState> critic_opt;
  bool shared_critic = true;

  std::size_t num_agents() const { return actors.size(); }
  std::size_t critic_index(std::size_t agent) const { return shared_critic ? 0 : agent; }
  const nn::ParamVector& critic_for(std::size_t agent) const { return critics.at(critic_index(agent)); }
};

// Actors get output gain 0.01 (near-uniform initial policy), critics 1.
// Draw order: actors in agent order, then critics.
PolicySet make_policy_set(const std::vector<AgentShape>& shapes, std::size_t state_size, bool shared_critic,
                          std::size_t hidden, Rng& rng);

bool same_parameters(const PolicySet& a, const PolicySet& b);

}  // namespace eosim::marl
