#pragma once

// Policy and value objectives with gradients. Policy objectives are to be
// maximised and their gradients point uphill; the value loss is a squared
// error to be minimised. All are means over the sample indices `idx`, and
// gradients are accumulated into the caller's buffer (pass an empty span to
// skip them).

#include <span>
#include <vector>

#include "eosim/marl/batch.hpp"
#include "eosim/nn/mlp.hpp"

namespace eosim::marl {

// min(r A, clip(r, 1 - eps, 1 + eps) A)
double clipped_surrogate(double ratio, double adv, double eps);
// d/dr of the above (0 where the clipped branch is active)
double clipped_surrogate_dratio(double ratio, double adv, double eps);

struct ActorTerms {
  double surrogate = 0.0;  // mean clipped surrogate
  double entropy = 0.0;    // mean policy entropy
  double approx_kl = 0.0;  // mean (log pi_old - log pi)
  double clip_fraction = 0.0;
};

// Mean of clipped surrogate + entropy_coef * entropy. `advantages` is indexed
// by row, like the trajectory.
ActorTerms actor_objective(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                           std::span<const double> advantages, std::span<const std::size_t> idx, double clip_eps,
                           double entropy_coef, std::span<double> grad);

// Mean clipped surrogate alone.
double ppo_loss(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                std::span<const double> advantages, std::span<const std::size_t> idx, double clip_eps,
                std::span<double> grad);

// Mean entropy of the policy on the selected rows.
double entropy_bonus(const nn::Mlp& net, const nn::ParamVector& params, Rows obs, std::span<const std::size_t> idx,
                     std::span<double> grad);

// Mean (V(s) - target)^2.
double value_loss(const nn::Mlp& net, const nn::ParamVector& params, Rows states, std::span<const double> targets,
                  std::span<const std::size_t> idx, std::span<double> grad);

// L_ppo - c1 L_value + c2 H, gradients split between actor and critic.
double total_loss(const nn::Mlp& actor, const nn::ParamVector& actor_params, const nn::Mlp& critic,
                  const nn::ParamVector& critic_params, const AgentTrajectory& traj, Rows states,
                  std::span<const double> advantages, std::span<const double> targets,
                  std::span<const std::size_t> idx, double clip_eps, double value_coef, double entropy_coef,
                  std::span<double> actor_grad, std::span<double> critic_grad);

// Mean importance-weighted advantage r A (no clipping).
double surrogate(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                 std::span<const double> advantages, std::span<const std::size_t> idx, std::span<double> grad);

// Mean KL(pi_ref || pi_params), with pi_ref given by per-row logits
// (`ref_logits` has one row per index in idx, in order).
double mean_kl(const nn::Mlp& net, const nn::ParamVector& params, Rows obs, Rows ref_logits,
               std::span<const std::size_t> idx, std::span<double> grad);

// New-policy / behaviour-policy ratio on every row.
std::vector<double> probability_ratios(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj);

std::vector<std::size_t> all_rows(std::size_t n);

}  // namespace eosim::marl
