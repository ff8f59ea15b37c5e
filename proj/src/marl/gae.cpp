#include "eosim/marl/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace eosim::marl {

AdvantageEstimate compute_gae(std::span<const double> rewards, std::span<const double> values,
                              std::span<const std::uint8_t> dones, std::span<const double> bootstrap, double gamma,
                              double lambda) {
  const std::size_t T = rewards.size();
  if (values.size() != T || dones.size() != T || bootstrap.size() != T)
    throw std::invalid_argument("compute_gae: rewards, values, dones and bootstrap must have equal length");
  if (T > 0 && !dones[T - 1]) throw std::invalid_argument("compute_gae: the last row must end an episode");
  AdvantageEstimate out;
  out.advantages.assign(T, 0.0);
  out.targets.assign(T, 0.0);
  double running = 0.0;
  for (std::size_t t = T; t-- > 0;) {
    const double next_v = dones[t] ? bootstrap[t] : values[t + 1];
    if (dones[t]) running = 0.0;
    const double delta = rewards[t] + gamma * next_v - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.targets[t] = running + values[t];
  }
  return out;
}

void normalize(std::vector<double>& x) {
  if (x.size() < 2) return;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = (v - mean) / (sd + 1e-8);
}

}  // namespace eosim::marl
