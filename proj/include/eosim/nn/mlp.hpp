#pragma once

// Dense tanh networks over a flat parameter vector, with exact reverse-mode
// gradients and forward-mode Jacobian-vector products.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "eosim/rng.hpp"

namespace eosim::nn {

enum class Activation { kTanh };

struct MlpSpec {
  // widths.front() is the input size, widths.back() the output size. With no
  // hidden layer the net is a single affine map.
  std::vector<std::size_t> widths;
  Activation activation = Activation::kTanh;

  void validate() const;
  bool operator==(const MlpSpec&) const = default;
};

MlpSpec actor_spec(std::size_t obs_size, std::size_t action_size, std::size_t hidden = 64);
MlpSpec critic_spec(std::size_t state_size, std::size_t hidden = 64);

struct LayerLayout {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // row-major [out][in]
  std::size_t bias_offset = 0;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StaleCacheError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Flat parameter storage. Every mutation gets a fresh stamp so caches built
// from an older state can be detected.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)), stamp_(next_stamp()) {}
  ParamVector(const ParamVector&) = default;
  ParamVector& operator=(const ParamVector&) = default;

  std::size_t size() const { return values_.size(); }
  std::span<const double> view() const { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::uint64_t stamp() const { return stamp_; }

  // Write access; invalidates caches.
  std::span<double> mutate() {
    stamp_ = next_stamp();
    return values_;
  }
  void assign(std::vector<double> values) {
    values_ = std::move(values);
    stamp_ = next_stamp();
  }

  bool operator==(const ParamVector& o) const { return values_ == o.values_; }

 private:
  static std::uint64_t next_stamp();
  std::vector<double> values_;
  std::uint64_t stamp_ = 0;
};

struct ForwardCache {
  // activations[0] is the input, activations[l] the output of hidden layer l.
  std::vector<std::vector<double>> activations;
  std::vector<double> output;
  std::uint64_t params_stamp = 0;
  bool valid = false;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  std::size_t num_params() const { return num_params_; }
  std::size_t input_size() const { return spec_.widths.front(); }
  std::size_t output_size() const { return spec_.widths.back(); }
  std::span<const LayerLayout> layout() const { return layout_; }

  // Orthogonal weights (gain sqrt(2) on hidden layers, `output_gain` on the
  // last), zero biases.
  ParamVector init_params(Rng& rng, double output_gain) const;

  const std::vector<double>& forward(const ParamVector& params, std::span<const double> x, ForwardCache& cache) const;
  std::vector<double> forward(const ParamVector& params, std::span<const double> x) const;

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward(const ParamVector& params, const ForwardCache& cache, std::span<const double> dout,
                std::span<double> grad) const;

  // d(output) for a parameter perturbation `dparams`, at the cached point.
  std::vector<double> jvp(const ParamVector& params, const ForwardCache& cache, std::span<const double> dparams) const;

 private:
  void check_cache(const ParamVector& params, const ForwardCache& cache) const;

  MlpSpec spec_;
  std::vector<LayerLayout> layout_;
  std::size_t num_params_ = 0;
};

}  // namespace eosim::nn
