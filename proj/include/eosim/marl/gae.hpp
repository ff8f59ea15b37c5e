#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace eosim::marl {

struct AdvantageEstimate {
  std::vector<double> advantages;
  std::vector<double> targets;  // A_t + V(s_t)
};

// Generalized advantage estimation over concatenated episodes. dones[t] marks
// the last row of an episode; bootstrap[t] is then the value of the state after
// it (0 for a terminal state) and is ignored elsewhere.
AdvantageEstimate compute_gae(std::span<const double> rewards, std::span<const double> values,
                              std::span<const std::uint8_t> dones, std::span<const double> bootstrap, double gamma,
                              double lambda);

// In place: zero mean, unit (population) std. No-op for fewer than 2 entries.
void normalize(std::vector<double>& x);

}  // namespace eosim::marl
