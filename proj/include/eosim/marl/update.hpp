#pragma once

// One learning update from a batch of on-policy samples.
//
//   ppo     single agent, clipped surrogate, critic on the global state
//   mappo   per-agent actors, one shared centralised critic, shared advantage
//   happo   agents updated one at a time in a random order, per-agent critics
//   trpo    single agent, natural-gradient step inside a KL trust region
//   hatrpo  the trust-region step applied sequentially like happo

#include <vector>

#include "eosim/marl/batch.hpp"
#include "eosim/marl/config.hpp"
#include "eosim/marl/policy.hpp"
#include "eosim/rng.hpp"

namespace eosim::marl {

struct TrustRegionEvent {
  std::size_t agent = 0;
  bool accepted = false;
  double alpha = 0.0;        // full step size before backtracking
  double step_scale = 0.0;   // backtracking factor of the accepted step
  double kl = 0.0;           // measured mean KL of the accepted step (0 if rejected)
  double improvement = 0.0;  // surrogate gain of the accepted step
  double g_hinv_g = 0.0;
  std::size_t backtracks = 0;
  double cg_residual = 0.0;
  bool cg_breakdown = false;
};

struct AgentUpdateStats {
  double surrogate = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

struct UpdateMetrics {
  double value_loss = 0.0;  // mean over critic steps
  std::vector<AgentUpdateStats> agents;
  std::vector<std::size_t> order;  // agent update order
  std::vector<TrustRegionEvent> trust_region;
};

UpdateMetrics ppo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng);
UpdateMetrics mappo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng);
UpdateMetrics happo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng);
UpdateMetrics trpo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng);
UpdateMetrics hatrpo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng);

UpdateMetrics run_update(Algorithm algo, PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg,
                         Rng& rng);

bool uses_shared_critic(Algorithm algo);

// Critic values on every row and the bootstrap value on every row that ends
// an episode (0 unless truncated).
struct ValueEstimates {
  std::vector<double> values;
  std::vector<double> bootstrap;
};
ValueEstimates critic_values(const nn::Mlp& net, const nn::ParamVector& params, const TrajectoryBatch& batch);

// Splits a permutation into `parts` contiguous minibatches; earlier ones take
// the remainder.
std::vector<std::vector<std::size_t>> split_minibatches(const std::vector<std::size_t>& perm, std::size_t parts);

}  // namespace eosim::marl
