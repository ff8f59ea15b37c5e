#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

namespace eosim::marl {

enum class Algorithm { kPpo, kMappo, kHappo, kHatrpo };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct AlgoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double value_coef = 0.5;     // c1
  double entropy_coef = 0.01;  // c2
  double lr = 3e-4;
  std::size_t epochs = 10;
  std::size_t minibatches = 4;
  double max_grad_norm = 0.5;  // 0 disables
  bool normalize_advantages = true;
  // trust region (HATRPO)
  double kl_delta = 0.01;
  std::size_t cg_iters = 10;
  double cg_damping = 0.1;
  double cg_tol = 1e-10;
  double backtrack_coef = 0.5;
  std::size_t max_backtracks = 10;
  // HAPPO/HATRPO: scale agent m's advantage by earlier agents' ratios
  bool compound_ratio = true;
  std::size_t hidden_units = 64;

  void validate() const;
};

nlohmann::json to_json(const AlgoConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
AlgoConfig algo_config_from_json(const nlohmann::json& j);

}  // namespace eosim::marl
