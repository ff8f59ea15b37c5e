#include "eosim/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace eosim::nn {

AdamState adam_init(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), 0}; }

void adam_step(ParamVector& params, std::span<const double> grad, AdamState& state, const AdamConfig& cfg) {
  const std::size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n)
    throw ShapeError("adam: gradient/state size does not match parameters");
  double sq = 0.0;
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::domain_error("adam: non-finite gradient");
    sq += g * g;
  }
  double scale = 1.0;
  const double gnorm = std::sqrt(sq);
  if (cfg.max_grad_norm > 0.0 && gnorm > cfg.max_grad_norm) scale = cfg.max_grad_norm / gnorm;

  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  auto p = params.mutate();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i] * scale;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    p[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
  }
}

}  // namespace eosim::nn
