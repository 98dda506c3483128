#pragma once

#include <memory>

#include "aeattack/autoencoder.hpp"

namespace aeattack::fixture {

inline constexpr std::uint64_t kMlpSeed = 2;

/// The default-configuration MLP (7,4), trained once per test binary.
inline std::shared_ptr<const autoencoder::TrainedAutoencoder> trained_mlp() {
  static const auto model = [] {
    autoencoder::TrainConfig cfg;
    cfg.seed = kMlpSeed;
    return std::make_shared<const autoencoder::TrainedAutoencoder>(
        autoencoder::train(autoencoder::build_mlp(4, 7), cfg));
  }();
  return model;
}

}  // namespace aeattack::fixture
