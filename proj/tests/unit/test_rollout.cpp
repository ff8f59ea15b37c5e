#include <cmath>

#include "doctest.h"
#include "eosim/nn/categorical.hpp"
#include "eosim/rollout/rollout.hpp"

using namespace eosim;
using namespace eosim::rollout;
using mission::ClusterKind;

namespace {

EnvSpec make_spec(ClusterKind kind, const std::string& scenario) {
  const auto sc = mission::scenario_preset(scenario);
  return {mission::load_world(mission::default_data_dir(), mission::make_cluster(kind), sc), sc};
}

marl::PolicySet fresh_policy(const EnvSpec& env, std::uint64_t seed, bool shared = true) {
  Rng rng(seed);
  return marl::make_policy_set(agent_shapes(env), global_state_size(env), shared, 64, rng);
}

bool same_batch(const marl::TrajectoryBatch& a, const marl::TrajectoryBatch& b) {
  if (a.global_states != b.global_states || a.rewards != b.rewards || a.dones != b.dones ||
      a.truncated != b.truncated || a.tails != b.tails || a.joint_log_probs != b.joint_log_probs)
    return false;
  for (std::size_t i = 0; i < a.agents.size(); ++i)
    if (a.agents[i].observations != b.agents[i].observations || a.agents[i].actions != b.agents[i].actions ||
        a.agents[i].log_probs != b.agents[i].log_probs)
      return false;
  return true;
}

double all_charge_return(const EnvSpec& spec, std::uint64_t seed) {
  mission::MissionEnv env(spec.world, spec.scenario);
  env.reset(seed);
  std::vector<int> joint(env.num_agents(), static_cast<int>(mission::kDefaultWindowSlots) + 1);
  double total = 0.0;
  while (!env.done()) total += env.step(joint).reward;
  return total;
}

}  // namespace

TEST_CASE("argmax collection is reproducible") {
  const auto spec = make_spec(ClusterKind::kSingle, "easy");
  const auto ps = fresh_policy(spec, 1);
  RolloutConfig cfg;
  cfg.num_envs = 1;
  cfg.seed = 42;
  const auto a = collect_rollouts(ps, spec, cfg, 0, ActionMode::kArgmax);
  const auto b = collect_rollouts(ps, spec, cfg, 0, ActionMode::kArgmax);
  CHECK(same_batch(a.batch, b.batch));
  CHECK(a.batch.size() == 95);
}

TEST_CASE("batch size is envs times steps") {
  const auto spec = make_spec(ClusterKind::kHeterogeneous2Opt1Sar, "easy-random-res");
  const auto ps = fresh_policy(spec, 2);
  RolloutConfig cfg;
  cfg.num_envs = 20;
  cfg.steps_per_env = 12;
  cfg.seed = 3;
  const auto r = collect_rollouts(ps, spec, cfg, 0);
  CHECK(r.batch.size() == 240);
  CHECK(r.env_steps == 240);
  for (const auto& a : r.batch.agents) CHECK(a.actions.size() == 240);
  CHECK_NOTHROW(r.batch.validate());
  CHECK(r.batch.tails.size() == 20);
  CHECK(r.completed.empty());
}

TEST_CASE("episodes longer than the budget are truncated, shorter ones restart") {
  const auto spec = make_spec(ClusterKind::kSingle, "easy");
  const auto ps = fresh_policy(spec, 4);
  RolloutConfig cfg;
  cfg.num_envs = 2;
  cfg.steps_per_env = 150;
  const auto r = collect_rollouts(ps, spec, cfg, 0);
  const auto& b = r.batch;
  REQUIRE(b.size() == 300);
  CHECK(b.dones[94] == 1);
  CHECK(b.truncated[94] == 0);
  CHECK(b.dones[149] == 1);
  CHECK(b.truncated[149] == 1);
  CHECK(b.dones[244] == 1);
  CHECK(r.completed.size() == 2);
  REQUIRE(b.tails.size() == 2);
  CHECK(b.tails[0].first == 149);
  CHECK(b.tails[1].first == 299);
}

TEST_CASE("joint log-prob is the sum of agent log-probs") {
  const auto spec = make_spec(ClusterKind::kHomogeneous3Opt, "easy");
  const auto ps = fresh_policy(spec, 5);
  RolloutConfig cfg;
  cfg.num_envs = 2;
  const auto r = collect_rollouts(ps, spec, cfg, 0);
  for (std::size_t t = 0; t < r.batch.size(); ++t) {
    double s = 0.0;
    for (const auto& a : r.batch.agents) s += a.log_probs[t];
    CHECK(r.batch.joint_log_probs[t] == s);
  }
  // behaviour log-probs come from the collecting policy
  const auto& a0 = r.batch.agents[0];
  for (std::size_t t = 0; t < 20; ++t) {
    const nn::Categorical d(ps.actor_nets[0].forward(ps.actors[0], a0.obs()[t]));
    CHECK(a0.log_probs[t] == d.log_prob(static_cast<std::size_t>(a0.actions[t])));
  }
}

TEST_CASE("env streams are isolated and the merge ignores worker count") {
  const auto spec = make_spec(ClusterKind::kSingle, "easy-random-res");
  const auto ps = fresh_policy(spec, 6);
  RolloutConfig three;
  three.num_envs = 3;
  three.steps_per_env = 30;
  three.seed = 9;
  auto five = three;
  five.num_envs = 5;
  const auto a = collect_rollouts(ps, spec, three, 4);
  const auto b = collect_rollouts(ps, spec, five, 4);
  const std::size_t rows = 90, S = spec.world ? a.batch.state_size : 0;
  CHECK(std::equal(a.batch.rewards.begin(), a.batch.rewards.end(), b.batch.rewards.begin()));
  CHECK(std::equal(a.batch.global_states.begin(), a.batch.global_states.end(), b.batch.global_states.begin()));
  CHECK(std::equal(a.batch.agents[0].actions.begin(), a.batch.agents[0].actions.end(),
                   b.batch.agents[0].actions.begin()));
  CHECK(b.batch.size() == 150);
  (void)rows;
  (void)S;

  auto threaded = five;
  threaded.workers = 4;
  CHECK(same_batch(collect_rollouts(ps, spec, threaded, 4).batch, b.batch));

  // different update index, different data
  CHECK_FALSE(same_batch(collect_rollouts(ps, spec, five, 5).batch, b.batch));
}

TEST_CASE("shape mismatches are reported") {
  const auto single = make_spec(ClusterKind::kSingle, "easy");
  const auto team = make_spec(ClusterKind::kHomogeneous3Opt, "easy");
  const auto ps = fresh_policy(single, 7);
  RolloutConfig cfg;
  cfg.num_envs = 1;
  CHECK_THROWS_AS(collect_rollouts(ps, team, cfg, 0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_policy(nullptr, single, 1, 0, ActionMode::kArgmax), std::invalid_argument);
  cfg.num_envs = 0;
  CHECK_THROWS(collect_rollouts(ps, single, cfg, 0));
}

TEST_CASE("evaluation is reproducible and argmax on repeated conditions has no spread") {
  const auto spec = make_spec(ClusterKind::kHeterogeneous2Opt1Sar, "easy");
  const auto ps = fresh_policy(spec, 8, false);
  const auto a = evaluate_policy(&ps, spec, 4, 11, ActionMode::kSample);
  const auto b = evaluate_policy(&ps, spec, 4, 11, ActionMode::kSample);
  CHECK(a.metrics.mean_return == b.metrics.mean_return);
  CHECK(a.metrics.std_return == b.metrics.std_return);
  CHECK(a.metrics.agent_returns == b.metrics.agent_returns);

  const auto rep = evaluate_policy(&ps, spec, 5, 11, ActionMode::kArgmax, false, true);
  CHECK(rep.metrics.std_return == 0.0);
  CHECK(rep.metrics.episodes == 5);
}

TEST_CASE("episode accounting") {
  for (const char* sc : {"easy", "hard-random-res"}) {
    const auto spec = make_spec(ClusterKind::kHomogeneous3Opt, sc);
    const auto r = evaluate_policy(nullptr, spec, 10, 1, ActionMode::kUniformRandom, true);
    for (std::size_t k = 0; k < r.episodes.size(); ++k) {
      const auto& e = r.episodes[k];
      const auto& log = r.logs[k];
      CHECK(e.unique_captures <= e.captures);
      CHECK(e.captures <= e.steps * 3);
      CHECK(e.steps == 95);
      double preload = 0.0;
      for (double g : log.initial_storage_GB) preload += g;
      CHECK(e.downlinked_GB <= preload + e.generated_GB + 1e-9);
      if (preload == 0.0) CHECK(e.downlinked_GB <= e.generated_GB + 1e-12);
      double sum = 0.0;
      for (double x : e.agent_returns) sum += x;
      CHECK(sum == doctest::Approx(e.total_return).epsilon(1e-12));
    }
  }
}

TEST_CASE("random play beats charging only") {
  const auto spec = make_spec(ClusterKind::kSingle, "easy");
  const auto rnd = evaluate_policy(nullptr, spec, 100, 21, ActionMode::kUniformRandom);
  double charge = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) charge += all_charge_return(spec, k);
  charge /= 100.0;
  MESSAGE("random " << rnd.metrics.mean_return << " all-charge " << charge);
  CHECK(rnd.metrics.mean_return > charge);
}

TEST_CASE("easy is no worse than hard for the same fresh policy") {
  const auto easy = make_spec(ClusterKind::kSingle, "easy");
  const auto hard = make_spec(ClusterKind::kSingle, "hard");
  const auto ps = fresh_policy(easy, 31);
  const std::size_t n = 1000;
  const auto e = evaluate_policy(&ps, easy, n, 5, ActionMode::kSample, true);
  const auto h = evaluate_policy(&ps, hard, n, 5, ActionMode::kSample, true);
  const auto downlink_reward = [&](const EvalResult& r) {
    double d = 0.0;
    for (const auto& log : r.logs)
      for (const auto& st : log.steps)
        for (const auto& a : st.agents) d += a.reward.delta;
    return d / static_cast<double>(n);
  };
  MESSAGE("easy " << e.metrics.mean_return << " (downlink part " << downlink_reward(e) << "), hard "
                  << h.metrics.mean_return << " (downlink part " << downlink_reward(h) << ")");
  CHECK(e.metrics.mean_return >= h.metrics.mean_return);
}

TEST_CASE("recorded episodes replay exactly") {
  const auto spec = make_spec(ClusterKind::kHeterogeneous2Opt1Sar, "hard-random-res");
  const auto ps = fresh_policy(spec, 9, false);
  const auto r = evaluate_policy(&ps, spec, 3, 2, ActionMode::kSample, true);
  REQUIRE(r.logs.size() == 3);
  for (const auto& log : r.logs) {
    const auto again = replay_episode(spec, log);
    CHECK(logs_identical(log, again));
  }
  auto bad = r.logs[0];
  bad.steps[10].agents[1].action = (bad.steps[10].agents[1].action + 1) % 11;
  CHECK_THROWS_AS(replay_episode(spec, bad), ReplayMismatch);
  auto tampered = r.logs[1];
  tampered.steps[3].reward += 1e-9;
  std::string where;
  CHECK_FALSE(logs_identical(r.logs[1], tampered, &where));
  CHECK(where == "step 3");
}

TEST_CASE("metric aggregation") {
  std::vector<EpisodeStats> eps(2);
  eps[0].total_return = 1.0;
  eps[0].agent_returns = {1.0};
  eps[0].min_battery_fraction = 0.7;
  eps[1].total_return = 3.0;
  eps[1].agent_returns = {3.0};
  eps[1].failed = true;
  eps[1].min_battery_fraction = 0.5;
  const auto m = aggregate(eps, 1, 100, 7);
  CHECK(m.mean_return == 2.0);
  CHECK(m.std_return == 1.0);
  CHECK(m.failure_rate == 0.5);
  CHECK(m.min_battery_fraction == 0.5);
  CHECK(m.step == 100);
  CHECK(m.seed == 7);
}
