#include "eosim/nn/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eosim::nn {

double log_sum_exp(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("log_sum_exp of an empty vector");
  const double m = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(m)) throw std::domain_error("non-finite logit");
  double s = 0.0;
  for (double x : logits) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  auto out = log_softmax(logits);
  for (auto& x : out) x = std::exp(x);
  return out;
}

Categorical::Categorical(std::span<const double> logits) : log_probs_(log_softmax(logits)) {
  probs_.resize(log_probs_.size());
  for (std::size_t i = 0; i < probs_.size(); ++i) probs_[i] = std::exp(log_probs_[i]);
}

double Categorical::log_prob(std::size_t action) const {
  if (action >= size()) throw std::out_of_range("action index out of range");
  return log_probs_[action];
}

double Categorical::entropy() const {
  double h = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (probs_[i] > 0.0) h -= probs_[i] * log_probs_[i];
  return h;
}

double Categorical::kl(const Categorical& other) const {
  if (other.size() != size()) throw std::invalid_argument("KL between distributions of different size");
  double d = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (probs_[i] > 0.0) d += probs_[i] * (log_probs_[i] - other.log_probs_[i]);
  return std::max(d, 0.0);
}

std::size_t Categorical::sample(Rng& rng) const {
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    c += probs_[i];
    if (u < c) return i;
  }
  // rounding left u above the total mass; take the last non-zero entry
  for (std::size_t i = size(); i-- > 0;)
    if (probs_[i] > 0.0) return i;
  return size() - 1;
}

std::size_t Categorical::argmax() const {
  return static_cast<std::size_t>(std::max_element(log_probs_.begin(), log_probs_.end()) - log_probs_.begin());
}

std::vector<double> Categorical::grad_log_prob(std::size_t action) const {
  if (action >= size()) throw std::out_of_range("action index out of range");
  std::vector<double> g(size());
  for (std::size_t i = 0; i < size(); ++i) g[i] = (i == action ? 1.0 : 0.0) - probs_[i];
  return g;
}

std::vector<double> Categorical::grad_entropy() const {
  // dH/dz_i = -p_i (log p_i + H)
  const double h = entropy();
  std::vector<double> g(size());
  for (std::size_t i = 0; i < size(); ++i) g[i] = probs_[i] > 0.0 ? -probs_[i] * (log_probs_[i] + h) : 0.0;
  return g;
}

std::vector<double> grad_kl_wrt_new(const Categorical& old_dist, const Categorical& new_dist) {
  if (old_dist.size() != new_dist.size()) throw std::invalid_argument("KL between distributions of different size");
  std::vector<double> g(new_dist.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = new_dist.probs()[i] - old_dist.probs()[i];
  return g;
}

}  // namespace eosim::nn
