#pragma once

// Minimal neural-network engine for the tiny autoencoders: dense and "same"-padded
// convolution layers, a handful of activations, softmax cross-entropy, exact
// reverse-mode gradients (parameters and input) and Adam.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "aeattack/rng.hpp"
#include "aeattack/tensor.hpp"

namespace aeattack::nn {

enum class LayerKind { Dense, Conv1D, Conv2D, Flatten, Normalize };
enum class Activation { Linear, ELU, ReLU, Softmax };
enum class Padding { Same };

std::string_view to_string(LayerKind kind);
std::string_view to_string(Activation act);
LayerKind parse_layer_kind(std::string_view name);
Activation parse_activation(std::string_view name);

/// One layer of a sequential network. All layers consume and produce flat vectors;
/// convolutions interpret theirs as row-major [channels][height][width]
/// (Conv1D is the height == 1 case).
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::Linear;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;

  // Convolution geometry; unused for other kinds.
  std::size_t in_channels = 0;
  std::size_t height = 1;
  std::size_t width = 0;
  std::size_t filter_count = 0;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  Padding padding = Padding::Same;

  static LayerSpec dense(std::size_t in, std::size_t out, Activation act);
  static LayerSpec conv1d(std::size_t in_channels, std::size_t length, std::size_t filters,
                          std::size_t kernel, Activation act);
  static LayerSpec conv2d(std::size_t in_channels, std::size_t height, std::size_t width,
                          std::size_t filters, std::size_t kernel_h, std::size_t kernel_w,
                          Activation act);
  static LayerSpec flatten(std::size_t dim);
  /// Scales its input to mean-square 0.5 per component.
  static LayerSpec normalize(std::size_t dim);

  bool has_params() const noexcept {
    return kind == LayerKind::Dense || kind == LayerKind::Conv1D || kind == LayerKind::Conv2D;
  }
  std::vector<std::size_t> weight_shape() const;
  std::vector<std::size_t> bias_shape() const;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct LayerParams {
  Tensor weights;
  Tensor biases;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

/// Per-layer parameters keyed by layer index; parameter-free layers hold empty tensors.
using NetworkParams = std::vector<LayerParams>;

struct Network {
  std::vector<LayerSpec> layers;
  NetworkParams params;
};

/// Checks dimension chaining, conv geometry and softmax placement. Throws ConfigError
/// naming the offending layer.
void validate_layers(const std::vector<LayerSpec>& layers);
/// validate_layers plus parameter shapes.
void validate_network(const std::vector<LayerSpec>& layers, const NetworkParams& params);

/// Glorot-uniform weights, zero biases.
NetworkParams init_params(const std::vector<LayerSpec>& layers, Rng& rng);
NetworkParams zeros_like(const NetworkParams& params);
/// into += scale * g
void accumulate(NetworkParams& into, const NetworkParams& g, double scale = 1.0);

/// activations[0] is the input; activations[i + 1] the output of layer i.
struct Trace {
  std::vector<Tensor> activations;
  const Tensor& output() const { return activations.back(); }
};

Trace forward(const std::vector<LayerSpec>& layers, const NetworkParams& params,
              const Tensor& input);
inline Trace forward(const Network& net, const Tensor& input) {
  return forward(net.layers, net.params, input);
}

struct Gradients {
  NetworkParams params;
  Tensor input;
};

/// Gradients of cross_entropy(output, target_label) for a Softmax-terminated network.
Gradients backward(const std::vector<LayerSpec>& layers, const NetworkParams& params,
                   const Trace& trace, std::size_t target_label);
inline Gradients backward(const Network& net, const Trace& trace, std::size_t target_label) {
  return backward(net.layers, net.params, trace, target_label);
}

/// Reverse pass seeded with an arbitrary gradient w.r.t. the network output.
Gradients backward_from(const std::vector<LayerSpec>& layers, const NetworkParams& params,
                        const Trace& trace, const Tensor& output_grad);

/// -log(max(probs[target], 1e-12)). probs must sum to 1 within 1e-9.
double cross_entropy(const Tensor& probs, std::size_t target_label);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

struct AdamHyperparams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamHyperparams hyper;
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::size_t step = 0;
};

AdamState make_adam_state(const NetworkParams& params, AdamHyperparams hyper = {});

/// One bias-corrected Adam update in place; increments state.step.
void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state);

}  // namespace aeattack::nn
