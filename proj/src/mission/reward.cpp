#include "eosim/reward.hpp"

#include <algorithm>

namespace eosim::mission {

std::string to_string(RewardBranch b) {
  switch (b) {
    case RewardBranch::kNone:
      return "none";
    case RewardBranch::kCapture:
      return "capture";
    case RewardBranch::kDownlink:
      return "downlink";
    case RewardBranch::kFailure:
      return "failure";
    case RewardBranch::kPowerOnly:
      return "power";
  }
  return "?";
}

double cloud_term(double sigma, resources::Payload payload) {
  if (payload == resources::Payload::kSar) return sigma < 0.5 ? -1.0 + sigma : sigma;
  return sigma < 0.5 ? 1.0 - sigma : -sigma;
}

double power_penalty(double q_prev, double q, double alpha) {
  // only consumption is penalised; charging earns nothing here
  return alpha * std::max(q_prev - q, 0.0) * (1.0 - q);
}

RewardComponents reward_step(const TransitionRecord& tr, const RewardParams& params) {
  RewardComponents c;
  if (tr.failure) {
    c.branch = RewardBranch::kFailure;
    c.failure = params.failure_penalty;
    c.total = c.failure;
    return c;
  }
  const double rho = power_penalty(tr.battery_fraction_prev, tr.battery_fraction, params.alpha);
  if (tr.captured) {
    c.branch = RewardBranch::kCapture;
    c.priority = tr.priority;
    c.rho = rho;
    c.cloud = cloud_term(tr.cloud_cover, tr.payload);
    c.total = c.priority - c.rho + c.cloud;
  } else if (tr.downlinked_GB > 0.0) {
    c.branch = RewardBranch::kDownlink;
    c.rho = rho;
    c.delta = params.beta * tr.downlinked_GB;
    c.total = -c.rho + c.delta;
  } else if (tr.battery_fraction_prev != tr.battery_fraction) {
    c.branch = RewardBranch::kPowerOnly;
    c.rho = rho;
    c.total = -c.rho;
  }
  return c;
}

}  // namespace eosim::mission
