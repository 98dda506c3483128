#include "aeattack/autoencoder.hpp"

#include <cmath>
#include <string>

#include "aeattack/channel.hpp"
#include "aeattack/errors.hpp"
#include "aeattack/rng.hpp"

namespace aeattack::autoencoder {

using nn::Activation;
using nn::LayerSpec;

std::string_view to_string(ArchName name) {
  return name == ArchName::MLP ? "mlp" : "cnn";
}

ArchName parse_arch_name(std::string_view name) {
  if (name == "mlp" || name == "MLP") return ArchName::MLP;
  if (name == "cnn" || name == "CNN") return ArchName::CNN;
  throw ConfigError("unknown architecture '" + std::string(name) + "' (expected mlp or cnn)");
}

namespace {

void check_code_params(unsigned k, unsigned n) {
  if (k < 1 || n < 1) throw ConfigError("autoencoder needs k >= 1 and n >= 1");
  if (k > 16) throw ConfigError("k > 16 gives an impractically large message set");
}

}  // namespace

AutoencoderArch build_mlp(unsigned k, unsigned n) {
  check_code_params(k, n);
  AutoencoderArch arch{ArchName::MLP, k, n, {}, {}};
  const std::size_t M = arch.messages();
  const std::size_t L = arch.signal_length();
  arch.encoder = {LayerSpec::dense(M, M, Activation::ELU), LayerSpec::dense(M, L, Activation::Linear),
                  LayerSpec::normalize(L)};
  arch.decoder = {LayerSpec::dense(L, M, Activation::ReLU),
                  LayerSpec::dense(M, M, Activation::Softmax)};
  nn::validate_layers(arch.encoder);
  nn::validate_layers(arch.decoder);
  return arch;
}

AutoencoderArch build_cnn(unsigned k, unsigned n, CnnKernels kernels) {
  check_code_params(k, n);
  AutoencoderArch arch{ArchName::CNN, k, n, {}, {}};
  const std::size_t M = arch.messages();
  const std::size_t L = arch.signal_length();
  arch.encoder = {
      LayerSpec::dense(M, M, Activation::ELU),
      LayerSpec::conv1d(1, M, 16, kernels.conv1d, Activation::Linear),
      LayerSpec::flatten(16 * M),
      LayerSpec::dense(16 * M, L, Activation::Linear),
      LayerSpec::normalize(L),
  };
  arch.decoder = {
      LayerSpec::conv2d(1, n, 2, 16, kernels.conv2d, kernels.conv2d, Activation::Linear),
      LayerSpec::conv2d(16, n, 2, 8, kernels.conv2d, kernels.conv2d, Activation::Linear),
      LayerSpec::flatten(8 * L),
      LayerSpec::dense(8 * L, 2 * M, Activation::ReLU),
      LayerSpec::dense(2 * M, M, Activation::Softmax),
  };
  nn::validate_layers(arch.encoder);
  nn::validate_layers(arch.decoder);
  return arch;
}

Tensor normalize_power(const Tensor& x_raw) {
  const double ss = squared_norm(x_raw.values());
  if (ss == 0.0) throw DegenerateInputError("normalize_power: all-zero input");
  return scaled(x_raw, std::sqrt(0.5 * static_cast<double>(x_raw.size()) / ss));
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train: epochs must be positive");
  if (batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning rate must be positive and finite");
  }
  if (!std::isfinite(train_ebno_db)) throw ConfigError("train: Eb/N0 must be finite");
}

Tensor one_hot(std::size_t index, std::size_t size) {
  if (index >= size) {
    throw ArgumentError("message " + std::to_string(index) + " outside [0, " +
                        std::to_string(size) + ")");
  }
  Tensor t = Tensor::zeros(size);
  t[index] = 1.0;
  return t;
}

Tensor encode(const TrainedAutoencoder& model, std::size_t s) {
  const auto trace = nn::forward(model.arch.encoder, model.encoder_params,
                                 one_hot(s, model.arch.messages()));
  return trace.output();
}

Decoded decode(const TrainedAutoencoder& model, const Tensor& y) {
  auto trace = nn::forward(model.arch.decoder, model.decoder_params, y);
  Decoded out;
  out.probs = std::move(trace.activations.back());
  out.message = nn::argmax(out.probs.values());
  return out;
}

std::vector<Tensor> codebook(const TrainedAutoencoder& model) {
  std::vector<Tensor> out;
  out.reserve(model.arch.messages());
  for (std::size_t s = 0; s < model.arch.messages(); ++s) out.push_back(encode(model, s));
  return out;
}

TrainedAutoencoder train(const AutoencoderArch& arch, const TrainConfig& config) {
  config.validate();
  nn::validate_layers(arch.encoder);
  nn::validate_layers(arch.decoder);
  const std::size_t M = arch.messages();
  const std::size_t L = arch.signal_length();
  if (arch.encoder.front().input_dim != M || arch.encoder.back().output_dim != L ||
      arch.decoder.front().input_dim != L || arch.decoder.back().output_dim != M) {
    throw ConfigError("train: encoder/decoder dims disagree with (k, n)");
  }

  TrainedAutoencoder model;
  model.arch = arch;
  model.config = config;
  Rng rng(config.seed);
  model.encoder_params = nn::init_params(arch.encoder, rng);
  model.decoder_params = nn::init_params(arch.decoder, rng);

  const nn::AdamHyperparams hyper{config.learning_rate, 0.9, 0.999, 1e-8};
  auto enc_state = nn::make_adam_state(model.encoder_params, hyper);
  auto dec_state = nn::make_adam_state(model.decoder_params, hyper);
  const double sigma2 = channel::noise_variance(config.train_ebno_db, arch.k, arch.n);
  std::uniform_int_distribution<std::size_t> pick(0, M - 1);
  const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

  double block_sum = 0.0;
  std::size_t block_count = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // The encoder is deterministic, so one forward per message serves the whole batch and
    // its backward pass can run once per message on the summed upstream gradient.
    auto diverged = [epoch](const char* what) {
      return NumericError("training diverged at epoch " + std::to_string(epoch) + " (" + what +
                          " is not finite)");
    };
    std::vector<nn::Trace> enc_traces;
    enc_traces.reserve(M);
    for (std::size_t s = 0; s < M; ++s) {
      enc_traces.push_back(nn::forward(arch.encoder, model.encoder_params, one_hot(s, M)));
      if (!enc_traces.back().output().all_finite()) throw diverged("encoder output");
    }
    std::vector<Tensor> upstream(M, Tensor::zeros(L));
    std::vector<bool> seen(M, false);
    auto dec_grads = nn::zeros_like(model.decoder_params);

    double loss = 0.0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::size_t s = pick(rng);
      const Tensor noise = channel::awgn(L, sigma2, rng);
      const Tensor y = add(enc_traces[s].output(), noise);
      const auto dec_trace = nn::forward(arch.decoder, model.decoder_params, y);
      if (!dec_trace.output().all_finite()) throw diverged("decoder output");
      loss += nn::cross_entropy(dec_trace.output(), s);
      const auto g = nn::backward(arch.decoder, model.decoder_params, dec_trace, s);
      nn::accumulate(dec_grads, g.params, inv_batch);
      // Additive noise passes the gradient through unchanged.
      for (std::size_t i = 0; i < L; ++i) upstream[s][i] += inv_batch * g.input[i];
      seen[s] = true;
    }
    loss *= inv_batch;
    if (!std::isfinite(loss)) throw diverged("loss");

    auto enc_grads = nn::zeros_like(model.encoder_params);
    for (std::size_t s = 0; s < M; ++s) {
      if (!seen[s]) continue;
      const auto g = nn::backward_from(arch.encoder, model.encoder_params, enc_traces[s],
                                       upstream[s]);
      nn::accumulate(enc_grads, g.params);
    }
    nn::adam_step(model.encoder_params, enc_grads, enc_state);
    nn::adam_step(model.decoder_params, dec_grads, dec_state);

    model.final_loss = loss;
    block_sum += loss;
    if (++block_count == model.loss_block || epoch + 1 == config.epochs) {
      model.loss_history.push_back(block_sum / static_cast<double>(block_count));
      block_sum = 0.0;
      block_count = 0;
    }
  }
  return model;
}

double clean_accuracy(const TrainedAutoencoder& model) {
  std::size_t correct = 0;
  const std::size_t M = model.arch.messages();
  for (std::size_t s = 0; s < M; ++s) {
    if (decode(model, encode(model, s)).message == s) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(M);
}

}  // namespace aeattack::autoencoder
