#include "eosim/experiment/train.hpp"

#include <cstdio>
#include <sstream>

namespace eosim::experiment {

namespace {
constexpr std::uint64_t kInitStream = 0x1a17;
constexpr std::uint64_t kUpdateStream = 0x0bda;
constexpr std::uint64_t kEvalStream = 0xe7a1;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}
}  // namespace

Trainer::Trainer(const ExperimentConfig& cfg, std::uint64_t seed, rollout::EnvSpec env)
    : cfg_(cfg), seed_(seed), env_(std::move(env)), update_rng_(derive_seed(seed, {kUpdateStream})) {
  cfg_.validate();
  cfg_.rollout.seed = seed;
  Rng init(derive_seed(seed, {kInitStream}));
  policies_ = marl::make_policy_set(rollout::agent_shapes(env_), rollout::global_state_size(env_),
                                    marl::uses_shared_critic(cfg_.algo), cfg_.algo_config.hidden_units, init);
}

Trainer::Trainer(const ExperimentConfig& cfg, const Checkpoint& ckpt, rollout::EnvSpec env)
    : cfg_(cfg), seed_(ckpt.seed), env_(std::move(env)) {
  cfg_.validate();
  if (ckpt.config_hash != config_hash(cfg_))
    throw std::invalid_argument("checkpoint config hash " + hash_hex(ckpt.config_hash) +
                                " does not match the experiment config (" + hash_hex(config_hash(cfg_)) + ")");
  cfg_.rollout.seed = seed_;
  policies_ = ckpt.policies;
  update_rng_ = ckpt.update_rng;
  global_step_ = ckpt.global_step;
  update_index_ = ckpt.update_index;
  const auto shapes = rollout::agent_shapes(env_);
  if (policies_.num_agents() != shapes.size()) throw std::invalid_argument("checkpoint agent count mismatch");
}

Trainer::Report Trainer::update() {
  Report rep;
  auto c = rollout::collect_rollouts(policies_, env_, cfg_.rollout, update_index_);
  rep.update = marl::run_update(cfg_.algo, policies_, c.batch, cfg_.algo_config, update_rng_);
  global_step_ += c.env_steps;
  ++update_index_;
  rep.metrics = rollout::aggregate(c.completed, policies_.num_agents(), global_step_, seed_);
  return rep;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config_hash = config_hash(cfg_);
  auto j = to_json(cfg_);
  c.config_json = j.dump();
  c.seed = seed_;
  c.global_step = global_step_;
  c.update_index = update_index_;
  c.policies = policies_;
  c.update_rng = update_rng_;
  return c;
}

std::string metrics_header(std::size_t num_agents) {
  std::string h = "step,seed,mean_return,std_return";
  for (std::size_t i = 0; i < num_agents; ++i) h += ",agent" + std::to_string(i) + "_return";
  h += ",unique_captures,downlinked_gb,failure_rate,min_battery_frac,wall_s";
  return h;
}

std::string metrics_row(const rollout::MetricSample& m) {
  std::ostringstream os;
  os << m.step << ',' << m.seed << ',' << num(m.mean_return) << ',' << num(m.std_return);
  for (double r : m.agent_returns) os << ',' << num(r);
  os << ',' << num(m.unique_captures) << ',' << num(m.downlinked_GB) << ',' << num(m.failure_rate) << ','
     << num(m.min_battery_fraction) << ',' << num(m.wall_s);
  return os.str();
}

std::uint64_t eval_seed_for(std::uint64_t seed) { return derive_seed(seed, {kEvalStream}); }

rollout::EvalResult final_evaluation(const ExperimentConfig& cfg, const marl::PolicySet& ps,
                                     const rollout::EnvSpec& env, std::uint64_t seed) {
  return rollout::evaluate_policy(&ps, env, cfg.rollout.eval_episodes, eval_seed_for(seed),
                                  rollout::ActionMode::kArgmax);
}

}  // namespace eosim::experiment
