#include "vmf/network.hpp"

#include <cmath>
#include <string>

#include "vmf/errors.hpp"
#include "vmf/kernels.hpp"
#include "vmf/objective.hpp"
#include "vmf/rng.hpp"

namespace vmf {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

Network::Network(NetworkConfig config) : config_(std::move(config)) {
  if (config_.widths.size() < 2) {
    throw ConfigError("Network: need at least input and embedding widths");
  }
  for (std::size_t w : config_.widths) {
    if (w == 0) throw ConfigError("Network: zero layer width");
  }
  if (config_.widths.back() < 2) {
    throw ConfigError("Network: embedding dimension must be >= 2");
  }
  layers_.resize(config_.widths.size() - 1);
  for (std::size_t k = 0; k + 1 < config_.widths.size(); ++k) {
    layers_[k].weights = Matrix(config_.widths[k], config_.widths[k + 1]);
    layers_[k].bias.assign(config_.widths[k + 1], 0.0);
  }
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers_) {
    total += layer.weights.size() + layer.bias.size();
  }
  return total;
}

Network init_network(const NetworkConfig& config) {
  Network net(config);
  Rng rng(derive_seed(config.seed, "init"));
  for (auto& layer : net.layers()) {
    const double fan_in = static_cast<double>(layer.weights.rows());
    const double fan_out = static_cast<double>(layer.weights.cols());
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
  }
  return net;
}

Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache) {
  if (batch.rows() == 0) {
    throw ConfigError("forward: empty batch");
  }
  if (batch.cols() != net.input_dim()) {
    throw ConfigError("forward: batch has " + std::to_string(batch.cols()) +
                      " columns, network expects " + std::to_string(net.input_dim()));
  }
  const auto& layers = net.layers();
  if (cache) {
    cache->input = batch;
    cache->pre_activations.clear();
    cache->activations.clear();
    cache->final_norms.clear();
  }

  Matrix current = batch;
  Matrix z;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    kernels::affine(current, layers[k].weights, layers[k].bias, z);
    if (cache) cache->pre_activations.push_back(z);
    if (k + 1 < layers.size()) {
      Matrix activated;
      if (net.config().activation == Activation::relu) {
        kernels::apply_relu(z, activated);
      } else {
        kernels::apply_tanh(z, activated);
      }
      if (cache) cache->activations.push_back(activated);
      current = std::move(activated);
    }
  }

  Matrix embeddings;
  std::vector<double> norms;
  kernels::normalize_rows(z, embeddings, norms);
  if (cache) cache->final_norms = std::move(norms);
  return embeddings;
}

Gradients backward(const Network& net, const ForwardCache& cache,
                   const Matrix& grad_embeddings) {
  const auto& layers = net.layers();
  if (cache.pre_activations.size() != layers.size() ||
      cache.activations.size() + 1 != layers.size() ||
      cache.final_norms.size() != cache.input.rows()) {
    throw ConfigError("backward: cache does not match this network");
  }
  const Matrix& z_last = cache.pre_activations.back();
  Matrix::require_same_shape(grad_embeddings, z_last, "backward");

  // Through the L2 normalization, row by row.
  Matrix gz(z_last.rows(), z_last.cols());
  for (std::size_t n = 0; n < z_last.rows(); ++n) {
    auto g = normalize_backward(z_last.row_span(n), grad_embeddings.row_span(n));
    for (std::size_t j = 0; j < z_last.cols(); ++j) gz(n, j) = g[j];
  }

  Gradients grads;
  grads.layers.resize(layers.size());
  for (std::size_t k = layers.size(); k-- > 0;) {
    const Matrix& layer_input = (k == 0) ? cache.input : cache.activations[k - 1];
    kernels::matmul_tn(layer_input, gz, grads.layers[k].weights);
    kernels::column_sums(gz, grads.layers[k].bias);
    if (k == 0) break;
    Matrix g_activation;
    kernels::matmul_nt(gz, layers[k].weights, g_activation);
    Matrix g_pre;
    if (net.config().activation == Activation::relu) {
      kernels::relu_backward(cache.pre_activations[k - 1], g_activation, g_pre);
    } else {
      kernels::tanh_backward(cache.pre_activations[k - 1], g_activation, g_pre);
    }
    gz = std::move(g_pre);
  }
  return grads;
}

OptimizerState make_optimizer(const Network& net, double learning_rate,
                              double momentum) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("make_optimizer: learning rate must be positive");
  }
  if (!(momentum >= 0.0) || !(momentum < 1.0)) {
    throw ConfigError("make_optimizer: momentum must lie in [0, 1)");
  }
  OptimizerState state{learning_rate, momentum, {}};
  state.velocity.resize(net.layers().size());
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    state.velocity[k].weights =
        Matrix(net.layers()[k].weights.rows(), net.layers()[k].weights.cols());
    state.velocity[k].bias.assign(net.layers()[k].bias.size(), 0.0);
  }
  return state;
}

void sgd_step(Network& net, const Gradients& grads, OptimizerState& state) {
  auto& layers = net.layers();
  if (grads.layers.size() != layers.size() ||
      state.velocity.size() != layers.size()) {
    throw ConfigError("sgd_step: mismatched gradient or velocity shapes");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Matrix::require_same_shape(grads.layers[k].weights, layers[k].weights,
                               "sgd_step");
    auto& vw = state.velocity[k].weights.data();
    auto& gw = grads.layers[k].weights.data();
    auto& w = layers[k].weights.data();
    for (std::size_t t = 0; t < w.size(); ++t) {
      vw[t] = state.momentum * vw[t] + gw[t];
      w[t] -= state.learning_rate * vw[t];
    }
    auto& vb = state.velocity[k].bias;
    const auto& gb = grads.layers[k].bias;
    auto& b = layers[k].bias;
    for (std::size_t t = 0; t < b.size(); ++t) {
      vb[t] = state.momentum * vb[t] + gb[t];
      b[t] -= state.learning_rate * vb[t];
    }
  }
}

}  // namespace vmf
