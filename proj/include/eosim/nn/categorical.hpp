#pragma once

// Categorical distribution over logits. Everything goes through log-sum-exp so
// large logits are safe.

#include <span>
#include <vector>

#include "eosim/rng.hpp"

namespace eosim::nn {

double log_sum_exp(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);
std::vector<double> softmax(std::span<const double> logits);

class Categorical {
 public:
  explicit Categorical(std::span<const double> logits);

  std::size_t size() const { return log_probs_.size(); }
  const std::vector<double>& log_probs() const { return log_probs_; }
  const std::vector<double>& probs() const { return probs_; }

  double log_prob(std::size_t action) const;
  double entropy() const;
  // KL(this || other)
  double kl(const Categorical& other) const;

  std::size_t sample(Rng& rng) const;
  std::size_t argmax() const;

  // Gradients with respect to this distribution's logits.
  std::vector<double> grad_log_prob(std::size_t action) const;
  std::vector<double> grad_entropy() const;

 private:
  std::vector<double> log_probs_;
  std::vector<double> probs_;
};

// d KL(old || new) / d new_logits = p_new - p_old
std::vector<double> grad_kl_wrt_new(const Categorical& old_dist, const Categorical& new_dist);

}  // namespace eosim::nn
