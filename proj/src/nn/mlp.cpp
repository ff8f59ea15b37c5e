#include "eosim/nn/mlp.hpp"

#include <atomic>
#include <cmath>

namespace eosim::nn {

std::uint64_t ParamVector::next_stamp() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ShapeError("MLP needs at least an input and an output width");
  for (auto w : widths)
    if (w == 0) throw ShapeError("MLP layer widths must be positive");
}

MlpSpec actor_spec(std::size_t obs_size, std::size_t action_size, std::size_t hidden) {
  return {{obs_size, hidden, hidden, action_size}, Activation::kTanh};
}

MlpSpec critic_spec(std::size_t state_size, std::size_t hidden) {
  return {{state_size, hidden, hidden, 1}, Activation::kTanh};
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
    LayerLayout L;
    L.in = spec_.widths[l];
    L.out = spec_.widths[l + 1];
    L.weight_offset = offset;
    offset += L.in * L.out;
    L.bias_offset = offset;
    offset += L.out;
    layout_.push_back(L);
  }
  num_params_ = offset;
}

ParamVector Mlp::init_params(Rng& rng, double output_gain) const {
  std::vector<double> p(num_params_, 0.0);
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& L = layout_[l];
    const double gain = l + 1 == layout_.size() ? output_gain : std::sqrt(2.0);
    // Gram-Schmidt over the shorter side of a Gaussian matrix.
    const bool rows_short = L.out <= L.in;
    const std::size_t n_vec = rows_short ? L.out : L.in;
    const std::size_t dim = rows_short ? L.in : L.out;
    std::vector<std::vector<double>> q(n_vec, std::vector<double>(dim));
    for (auto& v : q)
      for (auto& x : v) x = rng.normal();
    for (std::size_t a = 0; a < n_vec; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        double d = 0.0;
        for (std::size_t k = 0; k < dim; ++k) d += q[a][k] * q[b][k];
        for (std::size_t k = 0; k < dim; ++k) q[a][k] -= d * q[b][k];
      }
      double nrm = 0.0;
      for (double x : q[a]) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (auto& x : q[a]) x /= nrm;
    }
    for (std::size_t o = 0; o < L.out; ++o)
      for (std::size_t i = 0; i < L.in; ++i)
        p[L.weight_offset + o * L.in + i] = gain * (rows_short ? q[o][i] : q[i][o]);
  }
  return ParamVector(std::move(p));
}

const std::vector<double>& Mlp::forward(const ParamVector& params, std::span<const double> x,
                                        ForwardCache& cache) const {
  if (params.size() != num_params_)
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, expected " +
                     std::to_string(num_params_));
  if (x.size() != input_size())
    throw ShapeError("input has " + std::to_string(x.size()) + " entries, expected " + std::to_string(input_size()));
  const double* p = params.view().data();
  cache.activations.resize(layout_.size());
  cache.activations[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& L = layout_[l];
    const auto& in = cache.activations[l];
    const bool last = l + 1 == layout_.size();
    std::vector<double>& out = last ? cache.output : cache.activations[l + 1];
    out.resize(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = p + L.weight_offset + o * L.in;
      double z = p[L.bias_offset + o];
      for (std::size_t i = 0; i < L.in; ++i) z += w[i] * in[i];
      out[o] = last ? z : std::tanh(z);
    }
  }
  cache.params_stamp = params.stamp();
  cache.valid = true;
  return cache.output;
}

std::vector<double> Mlp::forward(const ParamVector& params, std::span<const double> x) const {
  ForwardCache cache;
  return forward(params, x, cache);
}

void Mlp::check_cache(const ParamVector& params, const ForwardCache& cache) const {
  if (!cache.valid) throw StaleCacheError("backward without a forward pass");
  if (cache.params_stamp != params.stamp()) throw StaleCacheError("parameters changed since the forward pass");
  if (cache.activations.size() != layout_.size() || cache.output.size() != output_size())
    throw StaleCacheError("cache belongs to a different network");
}

void Mlp::backward(const ParamVector& params, const ForwardCache& cache, std::span<const double> dout,
                   std::span<double> grad) const {
  check_cache(params, cache);
  if (dout.size() != output_size()) throw ShapeError("output gradient has the wrong size");
  if (grad.size() != num_params_) throw ShapeError("gradient buffer has the wrong size");
  const double* p = params.view().data();
  std::vector<double> dz(dout.begin(), dout.end());
  std::vector<double> da;
  for (std::size_t l = layout_.size(); l-- > 0;) {
    const auto& L = layout_[l];
    const auto& in = cache.activations[l];
    for (std::size_t o = 0; o < L.out; ++o) {
      const double g = dz[o];
      grad[L.bias_offset + o] += g;
      if (g == 0.0) continue;
      double* gw = grad.data() + L.weight_offset + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) gw[i] += g * in[i];
    }
    if (l == 0) break;
    da.assign(L.in, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double g = dz[o];
      if (g == 0.0) continue;
      const double* w = p + L.weight_offset + o * L.in;
      for (std::size_t i = 0; i < L.in; ++i) da[i] += w[i] * g;
    }
    // in = tanh(z_prev) => dz_prev = da * (1 - in^2)
    dz.resize(L.in);
    for (std::size_t i = 0; i < L.in; ++i) dz[i] = da[i] * (1.0 - in[i] * in[i]);
  }
}

std::vector<double> Mlp::jvp(const ParamVector& params, const ForwardCache& cache,
                             std::span<const double> dparams) const {
  check_cache(params, cache);
  if (dparams.size() != num_params_) throw ShapeError("tangent has the wrong size");
  const double* p = params.view().data();
  std::vector<double> dx(input_size(), 0.0);  // input does not depend on params
  std::vector<double> dz;
  for (std::size_t l = 0; l < layout_.size(); ++l) {
    const auto& L = layout_[l];
    const auto& in = cache.activations[l];
    dz.assign(L.out, 0.0);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = p + L.weight_offset + o * L.in;
      const double* dw = dparams.data() + L.weight_offset + o * L.in;
      double v = dparams[L.bias_offset + o];
      for (std::size_t i = 0; i < L.in; ++i) v += dw[i] * in[i] + w[i] * dx[i];
      dz[o] = v;
    }
    if (l + 1 == layout_.size()) break;
    const auto& out = cache.activations[l + 1];
    dx.resize(L.out);
    for (std::size_t o = 0; o < L.out; ++o) dx[o] = dz[o] * (1.0 - out[o] * out[o]);
  }
  return dz;
}

}  // namespace eosim::nn
