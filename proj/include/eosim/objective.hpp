#pragma once

// Offline mission-objective breakdown of a finished episode.

#include <vector>

#include "eosim/environment.hpp"

namespace eosim::mission {

struct ObjectiveBreakdown {
  double base_reward = 0.0;       // Q: sum of q_i over unique captures
  double power_used_Wh = 0.0;     // F1, to minimise
  double downlinked_GB = 0.0;     // F2, to maximise
  double payload_usage = 0.0;     // F3: sum of c_t over credited captures
  double composite = 0.0;         // J
  std::size_t unique_captures = 0;
  std::vector<double> power_used_per_agent_Wh;
};

// J = Q + F3 + beta * F2 - alpha * sum_i F1_i / B_max,i
// Throws std::invalid_argument for an incomplete log.
ObjectiveBreakdown evaluate_mission_objective(const EpisodeLog& log);

}  // namespace eosim::mission
