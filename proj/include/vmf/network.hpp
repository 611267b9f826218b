#pragma once

#include <cstdint>
#include <vector>

#include "vmf/matrix.hpp"

namespace vmf {

enum class Activation { relu, tanh };

Activation activation_from_string(const std::string& name);
const char* activation_name(Activation a);

// widths[0] is the input dimension, widths.back() the embedding dimension p.
// Hidden layers use the configured activation; the last layer is linear and
// its output is L2-normalized row by row, which is what makes the embedding
// live on the sphere.
struct NetworkConfig {
  std::vector<std::size_t> widths;
  Activation activation = Activation::relu;
  std::uint64_t seed = 0;
};

struct Layer {
  Matrix weights;  // fan_in x fan_out
  std::vector<double> bias;
};

class Network {
 public:
  explicit Network(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::size_t input_dim() const { return config_.widths.front(); }
  std::size_t embedding_dim() const { return config_.widths.back(); }
  std::size_t parameter_count() const;

 private:
  NetworkConfig config_;
  std::vector<Layer> layers_;
};

// Xavier-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases,
// drawn from the "init" sub-seed of config.seed.
Network init_network(const NetworkConfig& config);

// Everything backward() needs: layer inputs, pre-activations, and the
// pre-normalization row norms of the final layer.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;  // z_k, one per layer
  std::vector<Matrix> activations;      // act(z_k) for hidden layers
  std::vector<double> final_norms;      // ||z_last|| per row
};

// Returns the N x p matrix of unit-norm embeddings. Throws ZeroNormError if
// any final pre-normalization row vanishes.
Matrix forward(const Network& net, const Matrix& batch, ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Layer> layers;  // same shapes as the network's layers
};

// Backpropagates d(loss)/d(embeddings) through the normalization and every
// layer. The cache must come from a forward() call on this network.
Gradients backward(const Network& net, const ForwardCache& cache,
                   const Matrix& grad_embeddings);

// Classic momentum: v <- momentum*v + g; theta <- theta - lr*v.
struct OptimizerState {
  double learning_rate;
  double momentum;
  std::vector<Layer> velocity;
};

OptimizerState make_optimizer(const Network& net, double learning_rate,
                              double momentum);
void sgd_step(Network& net, const Gradients& grads, OptimizerState& state);

}  // namespace vmf
