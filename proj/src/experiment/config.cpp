#include "eosim/experiment/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "eosim/world.hpp"

namespace eosim::experiment {

namespace {

nlohmann::json rollout_to_json(const rollout::RolloutConfig& r) {
  return {{"num_envs", r.num_envs},
          {"steps_per_env", r.steps_per_env},
          {"eval_episodes", r.eval_episodes},
          {"workers", r.workers}};
}

rollout::RolloutConfig rollout_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("rollout config must be an object");
  rollout::RolloutConfig r;
  for (const auto& [key, _] : j.items())
    if (!rollout_to_json(r).contains(key)) throw std::invalid_argument("rollout config: unknown key '" + key + "'");
  r.num_envs = j.value("num_envs", r.num_envs);
  r.steps_per_env = j.value("steps_per_env", r.steps_per_env);
  r.eval_episodes = j.value("eval_episodes", r.eval_episodes);
  r.workers = j.value("workers", r.workers);
  r.validate();
  return r;
}

const char* kKeys[] = {"algo",         "cluster",     "scenario",         "seeds",      "total_steps",
                       "rollout",      "algo_config", "checkpoint_every", "output_dir", "data_dir",
                       "record_wall_time"};

}  // namespace

void ExperimentConfig::validate() const {
  if (algo == marl::Algorithm::kPpo && cluster != mission::ClusterKind::kSingle)
    throw std::invalid_argument("ppo is single-agent; use mappo, happo or hatrpo for cluster '" +
                                mission::to_string(cluster) + "'");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (checkpoint_every == 0) throw std::invalid_argument("checkpoint_every must be >= 1");
  scenario.validate();
  rollout.validate();
  algo_config.validate();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"algo", marl::to_string(c.algo)},
          {"cluster", mission::to_string(c.cluster)},
          {"scenario", mission::scenario_to_json(c.scenario)},
          {"seeds", c.seeds},
          {"total_steps", c.total_steps},
          {"rollout", rollout_to_json(c.rollout)},
          {"algo_config", marl::to_json(c.algo_config)},
          {"checkpoint_every", c.checkpoint_every},
          {"output_dir", c.output_dir},
          {"data_dir", c.data_dir},
          {"record_wall_time", c.record_wall_time}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
      throw std::invalid_argument("experiment config: unknown key '" + key + "'");
  ExperimentConfig c;
  try {
    if (j.contains("algo")) c.algo = marl::algorithm_from_string(j.at("algo").get<std::string>());
    if (j.contains("cluster")) c.cluster = mission::cluster_from_string(j.at("cluster").get<std::string>());
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      c.scenario = s.is_string() ? resolve_scenario(s.get<std::string>()) : mission::scenario_from_json(s);
    }
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.total_steps = j.value("total_steps", c.total_steps);
    if (j.contains("rollout")) c.rollout = rollout_from_json(j.at("rollout"));
    if (j.contains("algo_config")) c.algo_config = marl::algo_config_from_json(j.at("algo_config"));
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.data_dir = j.value("data_dir", c.data_dir);
    c.record_wall_time = j.value("record_wall_time", c.record_wall_time);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config file '" + path + "': " + e.what());
  }
  return experiment_config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("output_dir");
  j.erase("total_steps");
  j.erase("seeds");
  j.erase("record_wall_time");
  j.erase("data_dir");
  j["rollout"].erase("workers");
  const std::string text = j.dump();  // keys are sorted
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string default_output_name(const ExperimentConfig& c) {
  return "runs/" + marl::to_string(c.algo) + "_" + mission::to_string(c.cluster) + "_" + c.scenario.name;
}

std::string resolve_output_dir(const ExperimentConfig& c) {
  std::filesystem::path p = c.output_dir.empty() ? default_output_name(c) : c.output_dir;
  const char* root = std::getenv("EOSIM_OUTPUT_ROOT");
  if (root && *root && p.is_relative()) p = std::filesystem::path(root) / p;
  return p.string();
}

std::string resolve_data_dir(const ExperimentConfig& c) {
  return c.data_dir.empty() ? mission::default_data_dir() : c.data_dir;
}

rollout::EnvSpec make_env(const ExperimentConfig& c) { return make_env(c, c.scenario); }

rollout::EnvSpec make_env(const ExperimentConfig& c, const mission::ScenarioConfig& scenario) {
  return {mission::load_world(resolve_data_dir(c), mission::make_cluster(c.cluster), scenario), scenario};
}

mission::ScenarioConfig resolve_scenario(const std::string& name_or_path) {
  const auto names = mission::scenario_preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return mission::scenario_preset(name_or_path);
  if (std::filesystem::exists(name_or_path)) return mission::load_scenario_file(name_or_path);
  throw std::invalid_argument("unknown scenario '" + name_or_path + "' (not a preset and no such file)");
}

}  // namespace eosim::experiment
