#include "aeattack/nn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aeattack/errors.hpp"

namespace aeattack::nn {
namespace {

std::string layer_label(std::size_t index, const LayerSpec& layer) {
  return "layer " + std::to_string(index) + " (" + std::string(to_string(layer.kind)) + ")";
}

// Pad offset for a "same" convolution with an odd kernel.
constexpr std::size_t half(std::size_t kernel) { return (kernel - 1) / 2; }

void conv_forward(const LayerSpec& l, const LayerParams& p, const double* x, double* z) {
  const std::size_t C = l.in_channels, H = l.height, W = l.width, F = l.filter_count;
  const std::size_t KH = l.kernel_h, KW = l.kernel_w;
  const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(half(KH));
  const std::ptrdiff_t pw = static_cast<std::ptrdiff_t>(half(KW));
  const double* w = p.weights.data();
  const double* b = p.biases.data();
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t col = 0; col < W; ++col) {
        double acc = b[f];
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t kh = 0; kh < KH; ++kh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + kh) - ph;
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            const double* xrow = x + (c * H + static_cast<std::size_t>(ih)) * W;
            const double* wrow = w + ((f * C + c) * KH + kh) * KW;
            for (std::size_t kw = 0; kw < KW; ++kw) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(col + kw) - pw;
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
              acc += wrow[kw] * xrow[iw];
            }
          }
        }
        z[(f * H + h) * W + col] = acc;
      }
    }
  }
}

void conv_backward(const LayerSpec& l, const LayerParams& p, const double* x, const double* dz,
                   LayerParams& g, double* dx) {
  const std::size_t C = l.in_channels, H = l.height, W = l.width, F = l.filter_count;
  const std::size_t KH = l.kernel_h, KW = l.kernel_w;
  const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(half(KH));
  const std::ptrdiff_t pw = static_cast<std::ptrdiff_t>(half(KW));
  const double* w = p.weights.data();
  double* gw = g.weights.data();
  double* gb = g.biases.data();
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t col = 0; col < W; ++col) {
        const double d = dz[(f * H + h) * W + col];
        gb[f] += d;
        if (d == 0.0) continue;
        for (std::size_t c = 0; c < C; ++c) {
          for (std::size_t kh = 0; kh < KH; ++kh) {
            const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(h + kh) - ph;
            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(H)) continue;
            const std::size_t xoff = (c * H + static_cast<std::size_t>(ih)) * W;
            const std::size_t woff = ((f * C + c) * KH + kh) * KW;
            for (std::size_t kw = 0; kw < KW; ++kw) {
              const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(col + kw) - pw;
              if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(W)) continue;
              gw[woff + kw] += d * x[xoff + static_cast<std::size_t>(iw)];
              dx[xoff + static_cast<std::size_t>(iw)] += d * w[woff + kw];
            }
          }
        }
      }
    }
  }
}

void activate(Activation act, std::span<double> z) {
  switch (act) {
    case Activation::Linear:
      return;
    case Activation::ReLU:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::ELU:
      for (double& v : z) v = v >= 0.0 ? v : std::expm1(v);
      return;
    case Activation::Softmax: {
      const double peak = *std::max_element(z.begin(), z.end());
      double total = 0.0;
      for (double& v : z) {
        v = std::exp(v - peak);
        total += v;
      }
      for (double& v : z) v /= total;
      return;
    }
  }
}

// Maps dL/dy to dL/dz through the activation, using only the layer output y.
Tensor activation_backward(Activation act, const Tensor& y, const Tensor& dy) {
  Tensor dz = dy;
  switch (act) {
    case Activation::Linear:
      break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = y[i] > 0.0 ? dz[i] : 0.0;
      break;
    case Activation::ELU:
      // d/dz expm1(z) = exp(z) = y + 1 on the negative branch.
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= y[i] >= 0.0 ? 1.0 : y[i] + 1.0;
      break;
    case Activation::Softmax: {
      const double inner = dot(y.values(), dy.values());
      for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = y[i] * (dy[i] - inner);
      break;
    }
  }
  return dz;
}

Tensor normalize_forward(const Tensor& x) {
  const double ss = squared_norm(x.values());
  if (ss == 0.0) throw DegenerateInputError("normalize: cannot scale an all-zero vector");
  return scaled(Tensor::vector(x.storage()), std::sqrt(0.5 * static_cast<double>(x.size()) / ss));
}

Gradients reverse(const std::vector<LayerSpec>& layers, const NetworkParams& params,
                  const Trace& trace, Tensor grad, bool grad_is_preactivation) {
  if (trace.activations.size() != layers.size() + 1) {
    throw ConfigError("backward: trace does not belong to this network");
  }
  Gradients out;
  out.params = zeros_like(params);
  for (std::size_t idx = layers.size(); idx-- > 0;) {
    const LayerSpec& l = layers[idx];
    const Tensor& in = trace.activations[idx];
    const Tensor& y = trace.activations[idx + 1];
    if (grad.size() != l.output_dim) {
      throw ConfigError(layer_label(idx, l) + ": gradient length mismatch");
    }
    Tensor dz = (grad_is_preactivation && idx + 1 == layers.size())
                    ? std::move(grad)
                    : activation_backward(l.activation, y, grad);
    Tensor dx = Tensor::zeros(l.input_dim);
    switch (l.kind) {
      case LayerKind::Dense: {
        const LayerParams& p = params[idx];
        LayerParams& g = out.params[idx];
        const std::size_t I = l.input_dim;
        for (std::size_t o = 0; o < l.output_dim; ++o) {
          const double d = dz[o];
          g.biases[o] += d;
          const double* wrow = p.weights.data() + o * I;
          double* grow = g.weights.data() + o * I;
          for (std::size_t i = 0; i < I; ++i) {
            grow[i] += d * in[i];
            dx[i] += d * wrow[i];
          }
        }
        break;
      }
      case LayerKind::Conv1D:
      case LayerKind::Conv2D:
        conv_backward(l, params[idx], in.data(), dz.data(), out.params[idx], dx.data());
        break;
      case LayerKind::Flatten:
        dx = Tensor::vector(dz.storage());
        break;
      case LayerKind::Normalize: {
        const double ss = squared_norm(in.values());
        const double scale = std::sqrt(0.5 * static_cast<double>(in.size()) / ss);
        const double proj = dot(in.values(), dz.values()) / ss;
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = scale * (dz[i] - in[i] * proj);
        break;
      }
    }
    grad = std::move(dx);
  }
  out.input = grad.reshaped(trace.activations.front().shape());
  return out;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "Dense";
    case LayerKind::Conv1D: return "Conv1D";
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::Flatten: return "Flatten";
    case LayerKind::Normalize: return "Normalize";
  }
  return "?";
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::Linear: return "Linear";
    case Activation::ELU: return "eLU";
    case Activation::ReLU: return "ReLU";
    case Activation::Softmax: return "Softmax";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (auto k : {LayerKind::Dense, LayerKind::Conv1D, LayerKind::Conv2D, LayerKind::Flatten,
                 LayerKind::Normalize}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

Activation parse_activation(std::string_view name) {
  for (auto a : {Activation::Linear, Activation::ELU, Activation::ReLU, Activation::Softmax}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, Activation act) {
  LayerSpec l;
  l.kind = LayerKind::Dense;
  l.activation = act;
  l.input_dim = in;
  l.output_dim = out;
  return l;
}

LayerSpec LayerSpec::conv1d(std::size_t in_channels, std::size_t length, std::size_t filters,
                            std::size_t kernel, Activation act) {
  LayerSpec l = conv2d(in_channels, 1, length, filters, 1, kernel, act);
  l.kind = LayerKind::Conv1D;
  return l;
}

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t height, std::size_t width,
                            std::size_t filters, std::size_t kernel_h, std::size_t kernel_w,
                            Activation act) {
  LayerSpec l;
  l.kind = LayerKind::Conv2D;
  l.activation = act;
  l.in_channels = in_channels;
  l.height = height;
  l.width = width;
  l.filter_count = filters;
  l.kernel_h = kernel_h;
  l.kernel_w = kernel_w;
  l.input_dim = in_channels * height * width;
  l.output_dim = filters * height * width;
  return l;
}

LayerSpec LayerSpec::flatten(std::size_t dim) {
  LayerSpec l;
  l.kind = LayerKind::Flatten;
  l.input_dim = l.output_dim = dim;
  return l;
}

LayerSpec LayerSpec::normalize(std::size_t dim) {
  LayerSpec l;
  l.kind = LayerKind::Normalize;
  l.input_dim = l.output_dim = dim;
  return l;
}

std::vector<std::size_t> LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::Dense: return {output_dim, input_dim};
    case LayerKind::Conv1D: return {filter_count, in_channels, kernel_w};
    case LayerKind::Conv2D: return {filter_count, in_channels, kernel_h, kernel_w};
    default: return {};
  }
}

std::vector<std::size_t> LayerSpec::bias_shape() const {
  switch (kind) {
    case LayerKind::Dense: return {output_dim};
    case LayerKind::Conv1D:
    case LayerKind::Conv2D: return {filter_count};
    default: return {};
  }
}

void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw ConfigError("network has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    const std::string who = layer_label(i, l);
    if (l.input_dim == 0 || l.output_dim == 0) throw ConfigError(who + ": zero dimension");
    switch (l.kind) {
      case LayerKind::Dense:
        break;
      case LayerKind::Conv1D:
      case LayerKind::Conv2D:
        if (l.kind == LayerKind::Conv1D && (l.height != 1 || l.kernel_h != 1)) {
          throw ConfigError(who + ": Conv1D must have height 1 and kernel_h 1");
        }
        if (l.stride != 1 || l.padding != Padding::Same) {
          throw ConfigError(who + ": only stride 1 with same padding is supported");
        }
        if (l.kernel_h % 2 == 0 || l.kernel_w % 2 == 0) {
          throw ConfigError(who + ": same padding needs odd kernel sizes");
        }
        if (l.in_channels * l.height * l.width != l.input_dim ||
            l.filter_count * l.height * l.width != l.output_dim || l.filter_count == 0) {
          throw ConfigError(who + ": geometry disagrees with input/output dims");
        }
        break;
      case LayerKind::Flatten:
      case LayerKind::Normalize:
        if (l.input_dim != l.output_dim) throw ConfigError(who + ": must preserve dimension");
        if (l.activation != Activation::Linear) {
          throw ConfigError(who + ": takes no activation");
        }
        break;
    }
    if (l.activation == Activation::Softmax && i + 1 != layers.size()) {
      throw ConfigError(who + ": Softmax is only allowed on the final layer");
    }
    if (i + 1 < layers.size() && l.output_dim != layers[i + 1].input_dim) {
      throw ConfigError(who + ": output dim " + std::to_string(l.output_dim) +
                        " does not match next input dim " +
                        std::to_string(layers[i + 1].input_dim));
    }
  }
}

void validate_network(const std::vector<LayerSpec>& layers, const NetworkParams& params) {
  validate_layers(layers);
  if (params.size() != layers.size()) {
    throw ConfigError("parameter list has " + std::to_string(params.size()) + " entries for " +
                      std::to_string(layers.size()) + " layers");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (params[i].weights.shape() != layers[i].weight_shape() ||
        params[i].biases.shape() != layers[i].bias_shape()) {
      throw ConfigError(layer_label(i, layers[i]) + ": parameter shapes disagree with the layer");
    }
  }
}

NetworkParams init_params(const std::vector<LayerSpec>& layers, Rng& rng) {
  validate_layers(layers);
  NetworkParams params(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (!l.has_params()) continue;
    params[i].weights = Tensor(l.weight_shape());
    params[i].biases = Tensor(l.bias_shape());
    const std::size_t taps = l.kernel_h * l.kernel_w;
    const double fan_in = l.kind == LayerKind::Dense ? static_cast<double>(l.input_dim)
                                                     : static_cast<double>(l.in_channels * taps);
    const double fan_out = l.kind == LayerKind::Dense
                               ? static_cast<double>(l.output_dim)
                               : static_cast<double>(l.filter_count * taps);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : params[i].weights.values()) w = dist(rng);
  }
  return params;
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].weights.empty()) continue;
    out[i].weights = Tensor(params[i].weights.shape());
    out[i].biases = Tensor(params[i].biases.shape());
  }
  return out;
}

void accumulate(NetworkParams& into, const NetworkParams& g, double scale) {
  if (into.size() != g.size()) throw ConfigError("accumulate: layer count mismatch");
  for (std::size_t i = 0; i < into.size(); ++i) {
    auto add_into = [scale](Tensor& dst, const Tensor& src) {
      if (dst.size() != src.size()) throw ConfigError("accumulate: shape mismatch");
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
    };
    add_into(into[i].weights, g[i].weights);
    add_into(into[i].biases, g[i].biases);
  }
}

Trace forward(const std::vector<LayerSpec>& layers, const NetworkParams& params,
              const Tensor& input) {
  if (layers.empty()) throw ConfigError("forward: empty network");
  if (input.size() != layers.front().input_dim) {
    throw ConfigError(layer_label(0, layers.front()) + ": input length " +
                      std::to_string(input.size()) + " but layer expects " +
                      std::to_string(layers.front().input_dim));
  }
  if (params.size() != layers.size()) throw ConfigError("forward: parameter/layer count mismatch");
  Trace trace;
  trace.activations.reserve(layers.size() + 1);
  trace.activations.push_back(input);
  for (std::size_t idx = 0; idx < layers.size(); ++idx) {
    const LayerSpec& l = layers[idx];
    const Tensor& x = trace.activations.back();
    if (x.size() != l.input_dim) {
      throw ConfigError(layer_label(idx, l) + ": input length " + std::to_string(x.size()) +
                        " but layer expects " + std::to_string(l.input_dim));
    }
    Tensor z = Tensor::zeros(l.output_dim);
    switch (l.kind) {
      case LayerKind::Dense: {
        const LayerParams& p = params[idx];
        if (p.weights.size() != l.input_dim * l.output_dim || p.biases.size() != l.output_dim) {
          throw ConfigError(layer_label(idx, l) + ": parameter shape mismatch");
        }
        const std::size_t I = l.input_dim;
        for (std::size_t o = 0; o < l.output_dim; ++o) {
          const double* wrow = p.weights.data() + o * I;
          double acc = p.biases[o];
          for (std::size_t i = 0; i < I; ++i) acc += wrow[i] * x[i];
          z[o] = acc;
        }
        break;
      }
      case LayerKind::Conv1D:
      case LayerKind::Conv2D: {
        const LayerParams& p = params[idx];
        if (p.weights.shape() != l.weight_shape() || p.biases.shape() != l.bias_shape()) {
          throw ConfigError(layer_label(idx, l) + ": parameter shape mismatch");
        }
        conv_forward(l, p, x.data(), z.data());
        break;
      }
      case LayerKind::Flatten:
        z = Tensor::vector(x.storage());
        break;
      case LayerKind::Normalize:
        z = normalize_forward(x);
        break;
    }
    activate(l.activation, z.values());
    trace.activations.push_back(std::move(z));
  }
  return trace;
}

Gradients backward(const std::vector<LayerSpec>& layers, const NetworkParams& params,
                   const Trace& trace, std::size_t target_label) {
  if (layers.empty() || layers.back().activation != Activation::Softmax) {
    throw ConfigError("backward: cross-entropy gradient needs a Softmax-terminated network");
  }
  const Tensor& probs = trace.output();
  if (target_label >= probs.size()) {
    throw ArgumentError("backward: label " + std::to_string(target_label) + " out of range [0, " +
                        std::to_string(probs.size()) + ")");
  }
  // dL/dlogits = softmax - one_hot
  Tensor seed = Tensor::vector(probs.storage());
  seed[target_label] -= 1.0;
  return reverse(layers, params, trace, std::move(seed), true);
}

Gradients backward_from(const std::vector<LayerSpec>& layers, const NetworkParams& params,
                        const Trace& trace, const Tensor& output_grad) {
  return reverse(layers, params, trace, Tensor::vector(output_grad.storage()), false);
}

double cross_entropy(const Tensor& probs, std::size_t target_label) {
  if (target_label >= probs.size()) {
    throw ArgumentError("cross_entropy: label out of range");
  }
  double total = 0.0;
  for (double p : probs.values()) {
    if (!(p >= 0.0)) throw ArgumentError("cross_entropy: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ArgumentError("cross_entropy: probabilities sum to " + std::to_string(total));
  }
  return -std::log(std::max(probs[target_label], 1e-12));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

AdamState make_adam_state(const NetworkParams& params, AdamHyperparams hyper) {
  return AdamState{hyper, zeros_like(params), zeros_like(params), 0};
}

void adam_step(NetworkParams& params, const NetworkParams& grads, AdamState& state) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw ConfigError("adam_step: layer count mismatch");
  }
  ++state.step;
  const auto& h = state.hyper;
  const double t = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(h.beta1, t);
  const double correct2 = 1.0 - std::pow(h.beta2, t);
  auto update = [&](Tensor& theta, const Tensor& g, Tensor& m, Tensor& v) {
    if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
      throw ConfigError("adam_step: shape mismatch");
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = h.beta1 * m[j] + (1.0 - h.beta1) * g[j];
      v[j] = h.beta2 * v[j] + (1.0 - h.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correct1;
      const double v_hat = v[j] / correct2;
      theta[j] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weights, grads[i].weights, state.first_moment[i].weights,
           state.second_moment[i].weights);
    update(params[i].biases, grads[i].biases, state.first_moment[i].biases,
           state.second_moment[i].biases);
  }
}

}  // namespace aeattack::nn
