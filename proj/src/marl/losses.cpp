#include "eosim/marl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "eosim/nn/categorical.hpp"

namespace eosim::marl {

namespace {

void check_grad(std::span<double> grad, const nn::Mlp& net) {
  if (!grad.empty() && grad.size() != net.num_params()) throw nn::ShapeError("gradient buffer has the wrong size");
}

double checked_ratio(double logp, double old_logp, std::size_t row) {
  const double r = std::exp(logp - old_logp);
  if (!std::isfinite(r)) throw std::domain_error("non-finite probability ratio at row " + std::to_string(row));
  return r;
}

}  // namespace

double clipped_surrogate(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * adv, clipped * adv);
}

double clipped_surrogate_dratio(double ratio, double adv, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  // the unclipped term is the minimum (ties go to it)
  if (ratio * adv <= clipped * adv) return adv;
  return 0.0;
}

ActorTerms actor_objective(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                           std::span<const double> advantages, std::span<const std::size_t> idx, double clip_eps,
                           double entropy_coef, std::span<double> grad) {
  check_grad(grad, net);
  ActorTerms terms;
  if (idx.empty()) return terms;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  const Rows obs = traj.obs();
  nn::ForwardCache cache;
  std::vector<double> dlogits;
  std::size_t clipped = 0;
  for (std::size_t t : idx) {
    const auto& logits = net.forward(params, obs[t], cache);
    const nn::Categorical dist(logits);
    const auto a = static_cast<std::size_t>(traj.actions[t]);
    const double logp = dist.log_prob(a);
    const double r = checked_ratio(logp, traj.log_probs[t], t);
    const double adv = advantages[t];
    const double h = dist.entropy();
    terms.surrogate += clipped_surrogate(r, adv, clip_eps);
    terms.entropy += h;
    terms.approx_kl += traj.log_probs[t] - logp;
    if (std::abs(r - 1.0) > clip_eps) ++clipped;
    if (grad.empty()) continue;
    // d/dlogits [surrogate] = dS/dr * r * dlogp/dlogits
    const double ds = clipped_surrogate_dratio(r, adv, clip_eps) * r;
    const auto glp = dist.grad_log_prob(a);
    dlogits.assign(glp.size(), 0.0);
    for (std::size_t i = 0; i < glp.size(); ++i) dlogits[i] = ds * glp[i] * inv_n;
    if (entropy_coef != 0.0) {
      const auto gh = dist.grad_entropy();
      for (std::size_t i = 0; i < gh.size(); ++i) dlogits[i] += entropy_coef * gh[i] * inv_n;
    }
    net.backward(params, cache, dlogits, grad);
  }
  terms.surrogate *= inv_n;
  terms.entropy *= inv_n;
  terms.approx_kl *= inv_n;
  terms.clip_fraction = static_cast<double>(clipped) * inv_n;
  return terms;
}

double ppo_loss(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                std::span<const double> advantages, std::span<const std::size_t> idx, double clip_eps,
                std::span<double> grad) {
  return actor_objective(net, params, traj, advantages, idx, clip_eps, 0.0, grad).surrogate;
}

double entropy_bonus(const nn::Mlp& net, const nn::ParamVector& params, Rows obs, std::span<const std::size_t> idx,
                     std::span<double> grad) {
  check_grad(grad, net);
  if (idx.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  nn::ForwardCache cache;
  double sum = 0.0;
  for (std::size_t t : idx) {
    const nn::Categorical dist(net.forward(params, obs[t], cache));
    sum += dist.entropy();
    if (grad.empty()) continue;
    auto g = dist.grad_entropy();
    for (auto& x : g) x *= inv_n;
    net.backward(params, cache, g, grad);
  }
  return sum * inv_n;
}

double value_loss(const nn::Mlp& net, const nn::ParamVector& params, Rows states, std::span<const double> targets,
                  std::span<const std::size_t> idx, std::span<double> grad) {
  check_grad(grad, net);
  if (idx.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  nn::ForwardCache cache;
  double sum = 0.0;
  for (std::size_t t : idx) {
    const double v = net.forward(params, states[t], cache)[0];
    const double e = v - targets[t];
    sum += e * e;
    if (grad.empty()) continue;
    const double d = 2.0 * e * inv_n;
    net.backward(params, cache, std::span<const double>(&d, 1), grad);
  }
  return sum * inv_n;
}

double total_loss(const nn::Mlp& actor, const nn::ParamVector& actor_params, const nn::Mlp& critic,
                  const nn::ParamVector& critic_params, const AgentTrajectory& traj, Rows states,
                  std::span<const double> advantages, std::span<const double> targets,
                  std::span<const std::size_t> idx, double clip_eps, double value_coef, double entropy_coef,
                  std::span<double> actor_grad, std::span<double> critic_grad) {
  const auto terms = actor_objective(actor, actor_params, traj, advantages, idx, clip_eps, entropy_coef, actor_grad);
  std::vector<double> vg;
  if (!critic_grad.empty()) vg.assign(critic.num_params(), 0.0);
  const double lv = value_loss(critic, critic_params, states, targets, idx, vg);
  for (std::size_t i = 0; i < vg.size(); ++i) critic_grad[i] -= value_coef * vg[i];
  return terms.surrogate - value_coef * lv + entropy_coef * terms.entropy;
}

double surrogate(const nn::Mlp& net, const nn::ParamVector& params, const AgentTrajectory& traj,
                 std::span<const double> advantages, std::span<const std::size_t> idx, std::span<double> grad) {
  check_grad(grad, net);
  if (idx.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  const Rows obs = traj.obs();
  nn::ForwardCache cache;
  double sum = 0.0;
  for (std::size_t t : idx) {
    const nn::Categorical dist(net.forward(params, obs[t], cache));
    const auto a = static_cast<std::size_t>(traj.actions[t]);
    const double r = checked_ratio(dist.log_prob(a), traj.log_probs[t], t);
    sum += r * advantages[t];
    if (grad.empty()) continue;
    auto g = dist.grad_log_prob(a);
    for (auto& x : g) x *= r * advantages[t] * inv_n;
    net.backward(params, cache, g, grad);
  }
  return sum * inv_n;
}

double mean_kl(const nn::Mlp& net, const nn::ParamVector& params, Rows obs, Rows ref_logits,
               std::span<const std::size_t> idx, std::span<double> grad) {
  check_grad(grad, net);
  if (ref_logits.size() != idx.size()) throw nn::ShapeError("mean_kl: one reference row per index expected");
  if (idx.empty()) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(idx.size());
  nn::ForwardCache cache;
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const nn::Categorical ref(ref_logits[k]);
    const nn::Categorical cur(net.forward(params, obs[idx[k]], cache));
    const double kl = ref.kl(cur);
    if (!std::isfinite(kl)) throw std::domain_error("non-finite KL at row " + std::to_string(idx[k]));
    sum += kl;
    if (grad.empty()) continue;
    auto g = nn::grad_kl_wrt_new(ref, cur);
    for (auto& x : g) x *= inv_n;
    net.backward(params, cache, g, grad);
  }
  return sum * inv_n;
}

std::vector<double> probability_ratios(const nn::Mlp& net, const nn::ParamVector& params,
                                       const AgentTrajectory& traj) {
  const Rows obs = traj.obs();
  std::vector<double> r(traj.actions.size());
  nn::ForwardCache cache;
  for (std::size_t t = 0; t < r.size(); ++t) {
    const nn::Categorical dist(net.forward(params, obs[t], cache));
    r[t] = checked_ratio(dist.log_prob(static_cast<std::size_t>(traj.actions[t])), traj.log_probs[t], t);
  }
  return r;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace eosim::marl
