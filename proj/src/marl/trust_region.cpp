#include "eosim/marl/trust_region.hpp"

#include <cmath>
#include <stdexcept>

#include "eosim/nn/categorical.hpp"

namespace eosim::marl {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

FisherOperator::FisherOperator(const nn::Mlp& net, const nn::ParamVector& params, Rows obs,
                               std::span<const std::size_t> idx)
    : net_(&net), params_(&params) {
  caches_.resize(idx.size());
  probs_.resize(idx.size());
  logits_.reserve(idx.size() * net.output_size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const auto& z = net.forward(params, obs[idx[k]], caches_[k]);
    logits_.insert(logits_.end(), z.begin(), z.end());
    probs_[k] = nn::softmax(z);
  }
}

std::vector<double> FisherOperator::apply(std::span<const double> v, double damping) const {
  if (v.size() != dim()) throw nn::ShapeError("Fisher product: vector has the wrong size");
  std::vector<double> out(dim(), 0.0);
  if (caches_.empty()) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = damping * v[i];
    return out;
  }
  const double inv_n = 1.0 / static_cast<double>(caches_.size());
  std::vector<double> w;
  for (std::size_t k = 0; k < caches_.size(); ++k) {
    // Gauss-Newton: J^T (diag(p) - p p^T) J v; exact Hessian of the KL at the
    // reference point since the KL's logit gradient vanishes there.
    const auto u = net_->jvp(*params_, caches_[k], v);
    const auto& p = probs_[k];
    double pu = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) pu += p[i] * u[i];
    w.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) w[i] = (p[i] * (u[i] - pu)) * inv_n;
    net_->backward(*params_, caches_[k], w, out);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += damping * v[i];
    if (!std::isfinite(out[i])) throw std::domain_error("Fisher product: non-finite result");
  }
  return out;
}

std::vector<double> fisher_vector_product(const nn::Mlp& net, const nn::ParamVector& params, Rows obs,
                                          std::span<const std::size_t> idx, std::span<const double> v,
                                          double damping) {
  return FisherOperator(net, params, obs, idx).apply(v, damping);
}

CgResult conjugate_gradient(const LinearOperator& A, std::span<const double> b, std::size_t max_iters, double tol) {
  const std::size_t n = b.size();
  CgResult res;
  res.x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> p = r;
  double rr = dot(r, r);
  const double b_norm = std::sqrt(rr);
  res.residual_norm = b_norm;
  if (b_norm == 0.0) return res;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const auto Ap = A(p);
    if (Ap.size() != n) throw std::invalid_argument("conjugate_gradient: operator changed dimension");
    const double pAp = dot(p, Ap);
    if (!std::isfinite(pAp) || !(pAp > 1e-14 * dot(p, p))) {
      res.breakdown = true;
      break;
    }
    const double a = rr / pAp;
    for (std::size_t i = 0; i < n; ++i) {
      res.x[i] += a * p[i];
      r[i] -= a * Ap[i];
    }
    const double rr_new = dot(r, r);
    res.iterations = it + 1;
    res.residual_norm = std::sqrt(rr_new);
    if (res.residual_norm <= tol * b_norm) break;
    const double beta = rr_new / rr;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rr = rr_new;
  }
  return res;
}

double trust_region_step_size(double delta, double g_hinv_g) {
  if (!(delta > 0.0)) throw std::invalid_argument("trust region radius must be > 0");
  if (!(g_hinv_g > 0.0) || !std::isfinite(g_hinv_g)) return 0.0;
  return std::sqrt(2.0 * delta / g_hinv_g);
}

}  // namespace eosim::marl
