#include "eosim/marl/policy.hpp"

#include <stdexcept>

namespace eosim::marl {

PolicySet make_policy_set(const std::vector<AgentShape>& shapes, std::size_t state_size, bool shared_critic,
                          std::size_t hidden, Rng& rng) {
  if (shapes.empty()) throw std::invalid_argument("policy set needs at least one agent");
  PolicySet ps;
  ps.shared_critic = shared_critic;
  for (const auto& s : shapes) {
    ps.actor_nets.emplace_back(nn::actor_spec(s.obs_size, s.action_size, hidden));
    ps.actors.push_back(ps.actor_nets.back().init_params(rng, 0.01));
    ps.actor_opt.push_back(nn::adam_init(ps.actors.back().size()));
  }
  ps.critic_net = nn::Mlp(nn::critic_spec(state_size, hidden));
  const std::size_t n_critics = shared_critic ? 1 : shapes.size();
  for (std::size_t i = 0; i < n_critics; ++i) {
    ps.critics.push_back(ps.critic_net.init_params(rng, 1.0));
    ps.critic_opt.push_back(nn::adam_init(ps.critics.back().size()));
  }
  return ps;
}

bool same_parameters(const PolicySet& a, const PolicySet& b) {
  return a.shared_critic == b.shared_critic && a.actors == b.actors && a.critics == b.critics &&
         a.actor_opt == b.actor_opt && a.critic_opt == b.critic_opt;
}

}  // namespace eosim::marl
