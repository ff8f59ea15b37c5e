#pragma once

// Natural-gradient machinery: matrix-free Fisher-vector products, conjugate
// gradient and the trust-region step size.

#include <functional>
#include <span>
#include <vector>

#include "eosim/marl/batch.hpp"
#include "eosim/nn/mlp.hpp"

namespace eosim::marl {

// Forward passes at the reference parameters, reused across products.
class FisherOperator {
 public:
  FisherOperator(const nn::Mlp& net, const nn::ParamVector& params, Rows obs, std::span<const std::size_t> idx);

  // (H + damping I) v, H the curvature of mean KL(pi_ref || pi_theta) at the
  // reference point.
  std::vector<double> apply(std::span<const double> v, double damping) const;

  std::size_t dim() const { return net_->num_params(); }
  // Reference logits, one row per index.
  Rows ref_logits() const { return {logits_, net_->output_size()}; }

 private:
  const nn::Mlp* net_;
  const nn::ParamVector* params_;
  std::vector<nn::ForwardCache> caches_;
  std::vector<std::vector<double>> probs_;
  std::vector<double> logits_;
};

std::vector<double> fisher_vector_product(const nn::Mlp& net, const nn::ParamVector& params, Rows obs,
                                          std::span<const std::size_t> idx, std::span<const double> v,
                                          double damping);

struct CgResult {
  std::vector<double> x;
  double residual_norm = 0.0;  // ||A x - b||, tracked recursively
  std::size_t iterations = 0;
  bool breakdown = false;  // non-positive curvature met; x is the last good iterate
};

using LinearOperator = std::function<std::vector<double>(std::span<const double>)>;

// Solves A x = b for symmetric positive definite A, starting from 0. Stops when
// ||r|| <= tol ||b|| or after max_iters.
CgResult conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::size_t max_iters, double tol);

// sqrt(2 delta / g^T H^-1 g); 0 when the quadratic form is not positive.
double trust_region_step_size(double delta, double g_hinv_g);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace eosim::marl
