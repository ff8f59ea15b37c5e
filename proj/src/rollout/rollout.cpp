#include "eosim/rollout/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "eosim/nn/categorical.hpp"

namespace eosim::rollout {

namespace {

// stream tags for derive_seed
constexpr std::uint64_t kTrainTag = 0x7261;
constexpr std::uint64_t kEvalTag = 0x6576;
constexpr std::uint64_t kEpisodeStream = 1;
constexpr std::uint64_t kActionStream = 2;

void append_row(std::vector<double>& table, std::span<const double> row) {
  table.insert(table.end(), row.begin(), row.end());
}

marl::TrajectoryBatch empty_batch(const EnvSpec& env) {
  const auto shapes = agent_shapes(env);
  std::vector<std::size_t> obs, act;
  for (const auto& s : shapes) {
    obs.push_back(s.obs_size);
    act.push_back(s.action_size);
  }
  return marl::make_batch(obs, act, global_state_size(env));
}

void check_policy_shapes(const marl::PolicySet* ps, const EnvSpec& env) {
  if (!ps) return;
  const auto shapes = agent_shapes(env);
  if (ps->num_agents() != shapes.size())
    throw std::invalid_argument("policy set has " + std::to_string(ps->num_agents()) + " agents, env has " +
                                std::to_string(shapes.size()));
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (ps->actor_nets[i].input_size() != shapes[i].obs_size ||
        ps->actor_nets[i].output_size() != shapes[i].action_size)
      throw std::invalid_argument("agent " + std::to_string(i) + ": actor shape does not match the environment");
  }
  if (ps->critic_net.input_size() != global_state_size(env))
    throw std::invalid_argument("critic input does not match the global state size");
}

struct EnvCollect {
  marl::TrajectoryBatch batch;
  std::vector<EpisodeStats> completed;
};

EnvCollect collect_one(const marl::PolicySet* ps, const EnvSpec& spec, const RolloutConfig& cfg,
                       std::uint64_t update, std::size_t e, ActionMode mode) {
  EnvCollect out;
  out.batch = empty_batch(spec);
  auto& b = out.batch;
  mission::MissionEnv env(spec.world, spec.scenario);
  const std::size_t n = env.num_agents();
  const std::size_t steps = cfg.steps_per_env ? cfg.steps_per_env : spec.episode_steps();
  Rng action_rng(derive_seed(cfg.seed, {kTrainTag, update, e, kActionStream}));
  std::uint64_t episode = 0;
  auto obs = env.reset(derive_seed(cfg.seed, {kTrainTag, update, e, kEpisodeStream, episode}));
  std::vector<int> joint(n);
  for (std::size_t s = 0; s < steps; ++s) {
    if (env.done()) obs = env.reset(derive_seed(cfg.seed, {kTrainTag, update, e, kEpisodeStream, ++episode}));
    append_row(b.global_states, env.global_state());
    double joint_lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, lp] = select_action(ps, i, obs[i], env.action_size(i), mode, action_rng);
      joint[i] = a;
      joint_lp += lp;
      append_row(b.agents[i].observations, obs[i]);
      b.agents[i].actions.push_back(a);
      b.agents[i].log_probs.push_back(lp);
    }
    mission::StepResult r;
    try {
      r = env.step(joint);
    } catch (const std::exception& ex) {
      throw std::runtime_error("env " + std::to_string(e) + " step " + std::to_string(s) + ": " + ex.what());
    }
    b.rewards.push_back(r.reward);
    b.joint_log_probs.push_back(joint_lp);
    const bool last = s + 1 == steps;
    b.dones.push_back(r.done || last ? 1 : 0);
    b.truncated.push_back(!r.done && last ? 1 : 0);
    if (!r.done && last) b.tails.emplace_back(b.size() - 1, env.global_state());
    if (r.done) out.completed.push_back(episode_stats(env.log()));
    obs = std::move(r.observations);
  }
  return out;
}

bool same_components(const mission::RewardComponents& a, const mission::RewardComponents& b) {
  return a.branch == b.branch && a.priority == b.priority && a.rho == b.rho && a.delta == b.delta &&
         a.cloud == b.cloud && a.failure == b.failure && a.total == b.total;
}

bool same_agent_step(const mission::AgentStepLog& a, const mission::AgentStepLog& b) {
  return a.action == b.action && a.kind == b.kind && a.active == b.active && a.target == b.target &&
         a.window_open == b.window_open && a.credited == b.credited && a.priority == b.priority &&
         a.cloud_cover == b.cloud_cover && a.battery_fraction_prev == b.battery_fraction_prev &&
         a.battery_fraction == b.battery_fraction && a.storage_used_GB == b.storage_used_GB &&
         a.rw_speeds_rpm == b.rw_speeds_rpm && a.captured_GB == b.captured_GB &&
         a.downlinked_GB == b.downlinked_GB && a.generated_Wh == b.generated_Wh && a.consumed_Wh == b.consumed_Wh &&
         a.in_shadow == b.in_shadow && a.failure_event == b.failure_event && same_components(a.reward, b.reward);
}

}  // namespace

void RolloutConfig::validate() const {
  if (num_envs == 0) throw std::invalid_argument("num_envs must be >= 1");
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
}

std::size_t EnvSpec::episode_steps() const { return mission::episode_steps(scenario, world->cluster()); }

std::vector<marl::AgentShape> agent_shapes(const EnvSpec& env) {
  mission::MissionEnv probe(env.world, env.scenario);
  std::vector<marl::AgentShape> shapes;
  for (std::size_t i = 0; i < probe.num_agents(); ++i) shapes.push_back({probe.observation_size(i), probe.action_size(i)});
  return shapes;
}

std::size_t global_state_size(const EnvSpec& env) {
  return mission::MissionEnv(env.world, env.scenario).global_state_size();
}

EpisodeStats episode_stats(const mission::EpisodeLog& log) {
  EpisodeStats s;
  const std::size_t n = log.payloads.size();
  s.agent_returns.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.min_battery_fraction = std::min(s.min_battery_fraction, log.initial_battery_fraction[i]);
  for (const auto& step : log.steps) {
    s.total_return += step.reward;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = step.agents[i];
      s.agent_returns[i] += a.reward.total;
      if (a.kind == mission::ActionKind::kCapture && a.active && a.window_open) ++s.captures;
      if (a.credited) ++s.unique_captures;
      s.downlinked_GB += a.downlinked_GB;
      s.generated_GB += a.captured_GB;
      if (a.failure_event) s.failed = true;
      s.min_battery_fraction = std::min(s.min_battery_fraction, a.battery_fraction);
    }
  }
  s.steps = log.steps.size();
  return s;
}

MetricSample aggregate(const std::vector<EpisodeStats>& episodes, std::size_t num_agents, std::uint64_t step,
                       std::uint64_t seed) {
  MetricSample m;
  m.step = step;
  m.seed = seed;
  m.episodes = episodes.size();
  m.agent_returns.assign(num_agents, 0.0);
  if (episodes.empty()) return m;
  const double inv = 1.0 / static_cast<double>(episodes.size());
  m.min_battery_fraction = 1.0;
  for (const auto& e : episodes) {
    m.mean_return += e.total_return;
    for (std::size_t i = 0; i < num_agents && i < e.agent_returns.size(); ++i) m.agent_returns[i] += e.agent_returns[i];
    m.captures += static_cast<double>(e.captures);
    m.unique_captures += static_cast<double>(e.unique_captures);
    m.downlinked_GB += e.downlinked_GB;
    m.failure_rate += e.failed ? 1.0 : 0.0;
    m.min_battery_fraction = std::min(m.min_battery_fraction, e.min_battery_fraction);
  }
  m.mean_return *= inv;
  for (auto& r : m.agent_returns) r *= inv;
  m.captures *= inv;
  m.unique_captures *= inv;
  m.downlinked_GB *= inv;
  m.failure_rate *= inv;
  double var = 0.0;
  for (const auto& e : episodes) var += (e.total_return - m.mean_return) * (e.total_return - m.mean_return);
  m.std_return = std::sqrt(var * inv);
  return m;
}

std::pair<int, double> select_action(const marl::PolicySet* ps, std::size_t agent, std::span<const double> obs,
                                     std::size_t action_size, ActionMode mode, Rng& rng) {
  if (mode == ActionMode::kUniformRandom) {
    const auto a = static_cast<int>(rng.uniform_int(action_size));
    return {a, -std::log(static_cast<double>(action_size))};
  }
  if (!ps) throw std::invalid_argument("a policy set is required unless actions are uniform random");
  const nn::Categorical dist(ps->actor_nets[agent].forward(ps->actors[agent], obs));
  const std::size_t a = mode == ActionMode::kArgmax ? dist.argmax() : dist.sample(rng);
  return {static_cast<int>(a), dist.log_prob(a)};
}

CollectResult collect_rollouts(const marl::PolicySet& policies, const EnvSpec& env, const RolloutConfig& cfg,
                               std::uint64_t update_index, ActionMode mode) {
  cfg.validate();
  check_policy_shapes(&policies, env);
  std::vector<EnvCollect> parts(cfg.num_envs);
  const std::size_t workers = std::min(cfg.workers, cfg.num_envs);
  if (workers <= 1) {
    for (std::size_t e = 0; e < cfg.num_envs; ++e) parts[e] = collect_one(&policies, env, cfg, update_index, e, mode);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t e = w; e < cfg.num_envs; e += workers)
            parts[e] = collect_one(&policies, env, cfg, update_index, e, mode);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  CollectResult out;
  out.batch = empty_batch(env);
  for (auto& p : parts) {
    out.batch.append(p.batch);
    for (auto& s : p.completed) out.completed.push_back(std::move(s));
  }
  out.env_steps = out.batch.size();
  return out;
}

EvalResult evaluate_policy(const marl::PolicySet* policies, const EnvSpec& spec, std::size_t episodes,
                           std::uint64_t seed, ActionMode mode, bool keep_logs,
                           bool repeat_first_episode) {
  check_policy_shapes(policies, spec);
  EvalResult out;
  mission::MissionEnv env(spec.world, spec.scenario);
  const std::size_t n = env.num_agents();
  std::vector<int> joint(n);
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    const std::uint64_t k = repeat_first_episode ? 0 : ep;
    Rng action_rng(derive_seed(seed, {kEvalTag, k, kActionStream}));
    auto obs = env.reset(derive_seed(seed, {kEvalTag, k, kEpisodeStream}));
    while (!env.done()) {
      for (std::size_t i = 0; i < n; ++i) joint[i] = select_action(policies, i, obs[i], env.action_size(i), mode, action_rng).first;
      obs = env.step(joint).observations;
    }
    out.episodes.push_back(episode_stats(env.log()));
    if (keep_logs) out.logs.push_back(env.log());
  }
  out.metrics = aggregate(out.episodes, n, 0, seed);
  return out;
}

bool logs_identical(const mission::EpisodeLog& a, const mission::EpisodeLog& b, std::string* where) {
  const auto fail = [&](const std::string& w) {
    if (where) *where = w;
    return false;
  };
  if (a.seed != b.seed) return fail("seed");
  if (a.payloads != b.payloads || a.battery_capacity_Wh != b.battery_capacity_Wh ||
      a.initial_battery_fraction != b.initial_battery_fraction || a.initial_storage_GB != b.initial_storage_GB)
    return fail("initial conditions");
  if (a.horizon_steps != b.horizon_steps || a.complete != b.complete) return fail("episode length");
  if (a.reward_params.alpha != b.reward_params.alpha || a.reward_params.beta != b.reward_params.beta ||
      a.reward_params.failure_penalty != b.reward_params.failure_penalty)
    return fail("reward parameters");
  if (a.steps.size() != b.steps.size()) return fail("step count");
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    const auto& x = a.steps[t];
    const auto& y = b.steps[t];
    if (x.index != y.index || x.time_s != y.time_s || x.reward != y.reward || x.agents.size() != y.agents.size())
      return fail("step " + std::to_string(t));
    for (std::size_t i = 0; i < x.agents.size(); ++i)
      if (!same_agent_step(x.agents[i], y.agents[i]))
        return fail("step " + std::to_string(t) + " agent " + std::to_string(i));
  }
  return true;
}

mission::EpisodeLog replay_episode(const EnvSpec& spec, const mission::EpisodeLog& log) {
  mission::MissionEnv env(spec.world, spec.scenario);
  if (log.payloads.size() != env.num_agents())
    throw ReplayMismatch("record has " + std::to_string(log.payloads.size()) + " agents, environment " +
                         std::to_string(env.num_agents()));
  env.reset(log.seed);
  std::vector<int> joint(env.num_agents());
  for (const auto& step : log.steps) {
    if (env.done()) throw ReplayMismatch("environment ended before the recorded step " + std::to_string(step.index));
    for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = step.agents[i].action;
    env.step(joint);
  }
  std::string where;
  if (!logs_identical(log, env.log(), &where)) throw ReplayMismatch("replay diverged at " + where);
  return env.log();
}

}  // namespace eosim::rollout
