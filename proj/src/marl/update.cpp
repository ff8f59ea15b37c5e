#include "eosim/marl/update.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "eosim/marl/gae.hpp"
#include "eosim/marl/losses.hpp"
#include "eosim/marl/trust_region.hpp"

namespace eosim::marl {

namespace {

nn::AdamConfig adam_config(const AlgoConfig& cfg) {
  nn::AdamConfig a;
  a.lr = cfg.lr;
  a.max_grad_norm = cfg.max_grad_norm;
  return a;
}

void check_inputs(const PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg) {
  cfg.validate();
  batch.validate();
  if (batch.num_agents() != ps.num_agents())
    throw std::invalid_argument("batch has " + std::to_string(batch.num_agents()) + " agents, policy set " +
                                std::to_string(ps.num_agents()));
  if (batch.state_size != ps.critic_net.input_size()) throw std::invalid_argument("global state size mismatch");
  for (std::size_t i = 0; i < ps.num_agents(); ++i) {
    if (batch.agents[i].obs_size != ps.actor_nets[i].input_size() ||
        batch.agents[i].action_size != ps.actor_nets[i].output_size())
      throw std::invalid_argument("agent " + std::to_string(i) + " shape does not match its actor");
  }
  if (batch.size() == 0) throw std::invalid_argument("empty trajectory batch");
}

// GAE from critic `c`, normalised if configured.
AdvantageEstimate advantages_from(const PolicySet& ps, std::size_t c, const TrajectoryBatch& batch,
                                  const AlgoConfig& cfg) {
  const auto v = critic_values(ps.critic_net, ps.critics[c], batch);
  auto est = compute_gae(batch.rewards, v.values, batch.dones, v.bootstrap, cfg.gamma, cfg.gae_lambda);
  if (cfg.normalize_advantages) normalize(est.advantages);
  return est;
}

double critic_step(PolicySet& ps, std::size_t c, const TrajectoryBatch& batch, const std::vector<double>& targets,
                   const std::vector<std::size_t>& idx, const AlgoConfig& cfg) {
  std::vector<double> g(ps.critic_net.num_params(), 0.0);
  const double loss = value_loss(ps.critic_net, ps.critics[c], batch.states(), targets, idx, g);
  for (auto& x : g) x *= cfg.value_coef;
  nn::adam_step(ps.critics[c], g, ps.critic_opt[c], adam_config(cfg));
  return loss;
}

ActorTerms actor_step(PolicySet& ps, std::size_t i, const TrajectoryBatch& batch, const std::vector<double>& adv,
                      const std::vector<std::size_t>& idx, const AlgoConfig& cfg) {
  std::vector<double> g(ps.actor_nets[i].num_params(), 0.0);
  const auto terms =
      actor_objective(ps.actor_nets[i], ps.actors[i], batch.agents[i], adv, idx, cfg.clip_eps, cfg.entropy_coef, g);
  for (auto& x : g) x = -x;  // ascent
  nn::adam_step(ps.actors[i], g, ps.actor_opt[i], adam_config(cfg));
  return terms;
}

void accumulate(AgentUpdateStats& s, const ActorTerms& t, double w) {
  s.surrogate += w * t.surrogate;
  s.entropy += w * t.entropy;
  s.approx_kl += w * t.approx_kl;
  s.clip_fraction += w * t.clip_fraction;
}

void require_single(const PolicySet& ps, const char* algo) {
  if (ps.num_agents() != 1) throw std::invalid_argument(std::string(algo) + " is single-agent");
}

// Clipped-surrogate epochs for the agents in `agents`, each minibatch doing a
// critic step on critic `c` followed by the actor steps.
void clipped_epochs(PolicySet& ps, std::size_t c, const std::vector<std::size_t>& agents,
                    const TrajectoryBatch& batch, const AdvantageEstimate& est,
                    const std::vector<std::vector<double>>& adv_per_agent, const AlgoConfig& cfg, Rng& rng,
                    UpdateMetrics& m, double& vloss_sum, std::size_t& vloss_n) {
  const double w = 1.0 / static_cast<double>(cfg.epochs * cfg.minibatches);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto perm = rng.permutation(batch.size());
    for (const auto& idx : split_minibatches(perm, cfg.minibatches)) {
      vloss_sum += critic_step(ps, c, batch, est.targets, idx, cfg);
      ++vloss_n;
      for (std::size_t k = 0; k < agents.size(); ++k)
        accumulate(m.agents[agents[k]], actor_step(ps, agents[k], batch, adv_per_agent[k], idx, cfg), w);
    }
  }
}

void critic_regression(PolicySet& ps, std::size_t c, const TrajectoryBatch& batch,
                       const std::vector<double>& targets, const AlgoConfig& cfg, Rng& rng, double& vloss_sum,
                       std::size_t& vloss_n) {
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto perm = rng.permutation(batch.size());
    for (const auto& idx : split_minibatches(perm, cfg.minibatches)) {
      vloss_sum += critic_step(ps, c, batch, targets, idx, cfg);
      ++vloss_n;
    }
  }
}

TrustRegionEvent trust_region_step(PolicySet& ps, std::size_t i, const TrajectoryBatch& batch,
                                   const std::vector<double>& adv, const AlgoConfig& cfg) {
  TrustRegionEvent ev;
  ev.agent = i;
  const auto& net = ps.actor_nets[i];
  const auto& traj = batch.agents[i];
  const auto idx = all_rows(batch.size());
  const nn::ParamVector old = ps.actors[i];

  std::vector<double> g(net.num_params(), 0.0);
  const double l_old = surrogate(net, old, traj, adv, idx, g);
  if (dot(g, g) == 0.0) return ev;  // nothing to gain; no step

  const FisherOperator fisher(net, old, traj.obs(), idx);
  const auto cg = conjugate_gradient([&](std::span<const double> v) { return fisher.apply(v, cfg.cg_damping); }, g,
                                     cfg.cg_iters, cfg.cg_tol);
  ev.cg_residual = cg.residual_norm;
  ev.cg_breakdown = cg.breakdown;
  ev.g_hinv_g = dot(g, cg.x);
  ev.alpha = trust_region_step_size(cfg.kl_delta, ev.g_hinv_g);
  if (ev.alpha == 0.0) return ev;

  const Rows ref = fisher.ref_logits();
  double scale = 1.0;
  for (std::size_t k = 0; k < cfg.max_backtracks; ++k, scale *= cfg.backtrack_coef) {
    std::vector<double> cand(old.values());
    for (std::size_t j = 0; j < cand.size(); ++j) cand[j] += ev.alpha * scale * cg.x[j];
    const nn::ParamVector theta(std::move(cand));
    const double l_new = surrogate(net, theta, traj, adv, idx, {});
    const double kl = mean_kl(net, theta, traj.obs(), ref, idx, {});
    if (l_new - l_old > 0.0 && kl <= cfg.kl_delta) {
      ps.actors[i] = theta;
      ev.accepted = true;
      ev.step_scale = scale;
      ev.kl = kl;
      ev.improvement = l_new - l_old;
      ev.backtracks = k;
      return ev;
    }
  }
  ev.backtracks = cfg.max_backtracks;
  return ev;
}

void finish(UpdateMetrics& m, double vloss_sum, std::size_t vloss_n) {
  m.value_loss = vloss_n ? vloss_sum / static_cast<double>(vloss_n) : 0.0;
}

}  // namespace

bool uses_shared_critic(Algorithm algo) { return algo == Algorithm::kPpo || algo == Algorithm::kMappo; }

ValueEstimates critic_values(const nn::Mlp& net, const nn::ParamVector& params, const TrajectoryBatch& batch) {
  ValueEstimates v;
  const std::size_t T = batch.size();
  v.values.resize(T);
  v.bootstrap.assign(T, 0.0);
  const Rows s = batch.states();
  nn::ForwardCache cache;
  for (std::size_t t = 0; t < T; ++t) v.values[t] = net.forward(params, s[t], cache)[0];
  for (const auto& [t, state] : batch.tails) v.bootstrap[t] = net.forward(params, state, cache)[0];
  return v;
}

std::vector<std::vector<std::size_t>> split_minibatches(const std::vector<std::size_t>& perm, std::size_t parts) {
  if (parts == 0) throw std::invalid_argument("minibatch count must be >= 1");
  parts = std::min(parts, std::max<std::size_t>(perm.size(), 1));
  std::vector<std::vector<std::size_t>> out(parts);
  const std::size_t base = perm.size() / parts, extra = perm.size() % parts;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < parts; ++k) {
    const std::size_t n = base + (k < extra ? 1 : 0);
    out[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return out;
}

UpdateMetrics ppo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng) {
  check_inputs(ps, batch, cfg);
  require_single(ps, "ppo");
  UpdateMetrics m;
  m.agents.resize(1);
  m.order = {0};
  const auto est = advantages_from(ps, 0, batch, cfg);
  double vs = 0.0;
  std::size_t vn = 0;
  const double w = 1.0 / static_cast<double>(cfg.epochs * cfg.minibatches);
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto perm = rng.permutation(batch.size());
    for (const auto& idx : split_minibatches(perm, cfg.minibatches)) {
      vs += critic_step(ps, 0, batch, est.targets, idx, cfg);
      ++vn;
      accumulate(m.agents[0], actor_step(ps, 0, batch, est.advantages, idx, cfg), w);
    }
  }
  finish(m, vs, vn);
  return m;
}

UpdateMetrics mappo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng) {
  check_inputs(ps, batch, cfg);
  if (!ps.shared_critic) throw std::invalid_argument("mappo needs a shared critic");
  const std::size_t N = ps.num_agents();
  UpdateMetrics m;
  m.agents.resize(N);
  m.order = all_rows(N);
  const auto est = advantages_from(ps, 0, batch, cfg);
  const std::vector<std::vector<double>> adv(N, est.advantages);
  double vs = 0.0;
  std::size_t vn = 0;
  clipped_epochs(ps, 0, m.order, batch, est, adv, cfg, rng, m, vs, vn);
  finish(m, vs, vn);
  return m;
}

UpdateMetrics happo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng) {
  check_inputs(ps, batch, cfg);
  if (ps.shared_critic && ps.num_agents() > 1) throw std::invalid_argument("happo needs per-agent critics");
  const std::size_t N = ps.num_agents();
  UpdateMetrics m;
  m.agents.resize(N);
  m.order = rng.permutation(N);
  std::vector<double> compound(batch.size(), 1.0);
  double vs = 0.0;
  std::size_t vn = 0;
  for (std::size_t i : m.order) {
    const std::size_t c = ps.critic_index(i);
    const auto est = advantages_from(ps, c, batch, cfg);
    std::vector<double> adv = est.advantages;
    if (cfg.compound_ratio)
      for (std::size_t t = 0; t < adv.size(); ++t) adv[t] *= compound[t];
    clipped_epochs(ps, c, {i}, batch, est, {adv}, cfg, rng, m, vs, vn);
    if (cfg.compound_ratio) {
      const auto r = probability_ratios(ps.actor_nets[i], ps.actors[i], batch.agents[i]);
      for (std::size_t t = 0; t < r.size(); ++t) compound[t] *= r[t];
    }
  }
  finish(m, vs, vn);
  return m;
}

UpdateMetrics trpo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng) {
  check_inputs(ps, batch, cfg);
  require_single(ps, "trpo");
  UpdateMetrics m;
  m.agents.resize(1);
  m.order = {0};
  const auto est = advantages_from(ps, 0, batch, cfg);
  m.trust_region.push_back(trust_region_step(ps, 0, batch, est.advantages, cfg));
  double vs = 0.0;
  std::size_t vn = 0;
  critic_regression(ps, 0, batch, est.targets, cfg, rng, vs, vn);
  finish(m, vs, vn);
  return m;
}

UpdateMetrics hatrpo_update(PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg, Rng& rng) {
  check_inputs(ps, batch, cfg);
  if (ps.shared_critic && ps.num_agents() > 1) throw std::invalid_argument("hatrpo needs per-agent critics");
  const std::size_t N = ps.num_agents();
  UpdateMetrics m;
  m.agents.resize(N);
  m.order = rng.permutation(N);
  std::vector<double> compound(batch.size(), 1.0);
  double vs = 0.0;
  std::size_t vn = 0;
  for (std::size_t i : m.order) {
    const std::size_t c = ps.critic_index(i);
    const auto est = advantages_from(ps, c, batch, cfg);
    std::vector<double> adv = est.advantages;
    if (cfg.compound_ratio)
      for (std::size_t t = 0; t < adv.size(); ++t) adv[t] *= compound[t];
    m.trust_region.push_back(trust_region_step(ps, i, batch, adv, cfg));
    critic_regression(ps, c, batch, est.targets, cfg, rng, vs, vn);
    if (cfg.compound_ratio) {
      const auto r = probability_ratios(ps.actor_nets[i], ps.actors[i], batch.agents[i]);
      for (std::size_t t = 0; t < r.size(); ++t) compound[t] *= r[t];
    }
  }
  finish(m, vs, vn);
  return m;
}

UpdateMetrics run_update(Algorithm algo, PolicySet& ps, const TrajectoryBatch& batch, const AlgoConfig& cfg,
                         Rng& rng) {
  switch (algo) {
    case Algorithm::kPpo:
      return ppo_update(ps, batch, cfg, rng);
    case Algorithm::kMappo:
      return mappo_update(ps, batch, cfg, rng);
    case Algorithm::kHappo:
      return happo_update(ps, batch, cfg, rng);
    case Algorithm::kHatrpo:
      return hatrpo_update(ps, batch, cfg, rng);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace eosim::marl
