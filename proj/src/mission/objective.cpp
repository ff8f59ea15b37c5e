#include "eosim/objective.hpp"

#include <set>
#include <stdexcept>

namespace eosim::mission {

ObjectiveBreakdown evaluate_mission_objective(const EpisodeLog& log) {
  if (!log.complete) throw std::invalid_argument("mission objective needs a complete episode log");
  const std::size_t n = log.payloads.size();
  ObjectiveBreakdown out;
  out.power_used_per_agent_Wh.assign(n, 0.0);
  std::set<std::size_t> seen;
  for (const auto& step : log.steps) {
    if (step.agents.size() != n) throw std::invalid_argument("episode log has inconsistent agent count");
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = step.agents[i];
      out.power_used_per_agent_Wh[i] += a.consumed_Wh;
      out.downlinked_GB += a.downlinked_GB;
      if (!a.credited) continue;
      if (!a.target || !seen.insert(*a.target).second)
        throw std::invalid_argument("episode log credits an AoI more than once");
      out.base_reward += a.priority;
      out.payload_usage += cloud_term(a.cloud_cover, log.payloads[i]);
      ++out.unique_captures;
    }
  }
  double normalized_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.power_used_Wh += out.power_used_per_agent_Wh[i];
    normalized_power += out.power_used_per_agent_Wh[i] / log.battery_capacity_Wh[i];
  }
  out.composite = out.base_reward + out.payload_usage + log.reward_params.beta * out.downlinked_GB -
                  log.reward_params.alpha * normalized_power;
  return out;
}

}  // namespace eosim::mission
