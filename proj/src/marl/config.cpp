#include "eosim/marl/config.hpp"

#include <stdexcept>

namespace eosim::marl {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kPpo:
      return "ppo";
    case Algorithm::kMappo:
      return "mappo";
    case Algorithm::kHappo:
      return "happo";
    case Algorithm::kHatrpo:
      return "hatrpo";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ppo") return Algorithm::kPpo;
  if (s == "mappo") return Algorithm::kMappo;
  if (s == "happo") return Algorithm::kHappo;
  if (s == "hatrpo") return Algorithm::kHatrpo;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected ppo, mappo, happo or hatrpo)");
}

void AlgoConfig::validate() const {
  const auto fail = [](const std::string& m) { throw std::invalid_argument("algo config: " + m); };
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) fail("gae_lambda must lie in [0, 1]");
  if (!(clip_eps > 0.0)) fail("clip_eps must be > 0");
  if (!(kl_delta > 0.0)) fail("kl_delta must be > 0");
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) fail("loss coefficients must be >= 0");
  if (epochs == 0 || minibatches == 0) fail("epochs and minibatches must be >= 1");
  if (cg_iters == 0) fail("cg_iters must be >= 1");
  if (!(cg_damping >= 0.0)) fail("cg_damping must be >= 0");
  if (!(backtrack_coef > 0.0 && backtrack_coef < 1.0)) fail("backtrack_coef must lie in (0, 1)");
  if (max_backtracks == 0) fail("max_backtracks must be >= 1");
  if (!(max_grad_norm >= 0.0)) fail("max_grad_norm must be >= 0");
  if (hidden_units == 0) fail("hidden_units must be >= 1");
}

nlohmann::json to_json(const AlgoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_eps", c.clip_eps},
          {"value_coef", c.value_coef},
          {"entropy_coef", c.entropy_coef},
          {"lr", c.lr},
          {"epochs", c.epochs},
          {"minibatches", c.minibatches},
          {"max_grad_norm", c.max_grad_norm},
          {"normalize_advantages", c.normalize_advantages},
          {"kl_delta", c.kl_delta},
          {"cg_iters", c.cg_iters},
          {"cg_damping", c.cg_damping},
          {"cg_tol", c.cg_tol},
          {"backtrack_coef", c.backtrack_coef},
          {"max_backtracks", c.max_backtracks},
          {"compound_ratio", c.compound_ratio},
          {"hidden_units", c.hidden_units}};
}

AlgoConfig algo_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("algo config must be an object");
  AlgoConfig c;
  const auto known = to_json(c);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw std::invalid_argument("algo config: unknown key '" + key + "'");
  try {
    c.gamma = j.value("gamma", c.gamma);
    c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
    c.clip_eps = j.value("clip_eps", c.clip_eps);
    c.value_coef = j.value("value_coef", c.value_coef);
    c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.minibatches = j.value("minibatches", c.minibatches);
    c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
    c.normalize_advantages = j.value("normalize_advantages", c.normalize_advantages);
    c.kl_delta = j.value("kl_delta", c.kl_delta);
    c.cg_iters = j.value("cg_iters", c.cg_iters);
    c.cg_damping = j.value("cg_damping", c.cg_damping);
    c.cg_tol = j.value("cg_tol", c.cg_tol);
    c.backtrack_coef = j.value("backtrack_coef", c.backtrack_coef);
    c.max_backtracks = j.value("max_backtracks", c.max_backtracks);
    c.compound_ratio = j.value("compound_ratio", c.compound_ratio);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("algo config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace eosim::marl
