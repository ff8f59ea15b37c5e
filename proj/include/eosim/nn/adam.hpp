#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eosim/nn/mlp.hpp"

namespace eosim::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

AdamState adam_init(std::size_t n);

// One descent step on `params`. Throws std::domain_error on a non-finite
// gradient, leaving params and state untouched.
void adam_step(ParamVector& params, std::span<const double> grad, AdamState& state, const AdamConfig& cfg);

}  // namespace eosim::nn
