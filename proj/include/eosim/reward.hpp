#pragma once

// Per-agent step reward: capture value, power penalty, downlink bonus,
// payload/cloud matching and the failure penalty.

#include <string>

#include "eosim/resources.hpp"

namespace eosim::mission {

struct RewardParams {
  double alpha = 1.0;  // power penalty scale
  double beta = 0.1;   // downlink reward per GB
  double failure_penalty = -100.0;
};

enum class RewardBranch { kNone, kCapture, kDownlink, kFailure, kPowerOnly };

std::string to_string(RewardBranch b);

// What happened to one agent during one decision step.
struct TransitionRecord {
  resources::Payload payload = resources::Payload::kOptical;
  double battery_fraction_prev = 1.0;  // Q_{t-1}
  double battery_fraction = 1.0;       // Q_t
  bool captured = false;               // credited, unique capture
  double priority = 0.0;               // q_i of the captured AoI
  double cloud_cover = 0.0;            // sigma of the captured AoI
  double downlinked_GB = 0.0;          // Delta D_t
  bool failure = false;                // failure latched during this step
};

struct RewardComponents {
  RewardBranch branch = RewardBranch::kNone;
  double priority = 0.0;  // q_i term
  double rho = 0.0;
  double delta = 0.0;
  double cloud = 0.0;  // c_t
  double failure = 0.0;
  double total = 0.0;
};

// c_t: positive when the payload suits the cloud cover.
double cloud_term(double sigma, resources::Payload payload);

// rho_t = alpha * max(Q_{t-1} - Q_t, 0) * (1 - Q_t)
double power_penalty(double q_prev, double q, double alpha);

// Branch precedence: failure, capture, downlink (Delta D_t > 0), power-only
// (Q changed), otherwise zero.
RewardComponents reward_step(const TransitionRecord& tr, const RewardParams& params = {});

}  // namespace eosim::mission
