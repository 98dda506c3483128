#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aeattack/nn.hpp"
#include "aeattack/tensor.hpp"

namespace aeattack::autoencoder {

enum class ArchName { MLP, CNN };

std::string_view to_string(ArchName name);
ArchName parse_arch_name(std::string_view name);

struct AutoencoderArch {
  ArchName name = ArchName::MLP;
  unsigned k = 4;  // bits per message
  unsigned n = 7;  // complex channel uses
  std::vector<nn::LayerSpec> encoder;
  std::vector<nn::LayerSpec> decoder;

  std::size_t messages() const noexcept { return std::size_t{1} << k; }
  std::size_t signal_length() const noexcept { return 2 * std::size_t{n}; }
};

/// encoder = Dense(M->M)+eLU, Dense(M->2n), Normalize
/// decoder = Dense(2n->M)+ReLU, Dense(M->M)+Softmax
AutoencoderArch build_mlp(unsigned k, unsigned n);

struct CnnKernels {
  std::size_t conv1d = 3;
  std::size_t conv2d = 3;
};

/// encoder = Dense(M->M)+eLU, Conv1D(16), Flatten(16M), Dense(16M->2n), Normalize
/// decoder = Conv2D(16), Conv2D(8), Flatten(16n), Dense(->2M)+ReLU, Dense(2M->M)+Softmax
///
/// The decoder convolutions see the received block as one channel on an n x 2 grid
/// (one row per channel use, columns real/imaginary), which is the interleaved
/// layout read row-major.
AutoencoderArch build_cnn(unsigned k, unsigned n, CnnKernels kernels = {});

/// Scales x_raw to mean-square 0.5 per component. DegenerateInputError on all-zero input.
Tensor normalize_power(const Tensor& x_raw);

struct TrainConfig {
  /// Optimizer steps; each draws a fresh batch of messages and noise.
  std::size_t epochs = 10000;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  double train_ebno_db = 7.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainedAutoencoder {
  AutoencoderArch arch;
  nn::NetworkParams encoder_params;
  nn::NetworkParams decoder_params;
  TrainConfig config;
  /// Mean batch loss per block of `loss_block` epochs.
  std::vector<double> loss_history;
  std::size_t loss_block = 100;
  double final_loss = 0.0;
};

Tensor one_hot(std::size_t index, std::size_t size);

/// x = f(s); ArgumentError if s >= M.
Tensor encode(const TrainedAutoencoder& model, std::size_t s);

struct Decoded {
  Tensor probs;
  std::size_t message = 0;
};

/// s_hat = argmax g(y), lowest index on ties.
Decoded decode(const TrainedAutoencoder& model, const Tensor& y);

/// encode(s) for every s in [0, M).
std::vector<Tensor> codebook(const TrainedAutoencoder& model);

/// Joint Adam training of encoder and decoder through AWGN at config.train_ebno_db.
/// Throws NumericError naming the epoch if the loss stops being finite.
TrainedAutoencoder train(const AutoencoderArch& arch, const TrainConfig& config);

/// Fraction of messages decoded correctly with no noise.
double clean_accuracy(const TrainedAutoencoder& model);

}  // namespace aeattack::autoencoder
