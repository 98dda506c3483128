#pragma once

// AWGN channel: Eb/N0 bookkeeping, noise, additive perturbations, PSR accounting
// and cyclic time shifts. Signals are 2n real vectors laid out as n interleaved
// (real, imaginary) pairs.

#include <cstddef>

#include "aeattack/rng.hpp"
#include "aeattack/tensor.hpp"

namespace aeattack::channel {

/// sigma2 = 1 / (2 * (k / n) * 10^(ebno_db / 10)), the complex noise variance with Eb = 1.
double noise_variance(double ebno_db, unsigned k, unsigned n);

struct ChannelConfig {
  double ebno_db = 0.0;
  unsigned k = 4;
  unsigned n = 7;
  double sigma2 = 0.0;

  static ChannelConfig make(double ebno_db, unsigned k, unsigned n) {
    return {ebno_db, k, n, noise_variance(ebno_db, k, n)};
  }
};

struct Psr {
  double db = 0.0;
};

/// CN(0, sigma2 I) over `length / 2` complex samples: each real component has
/// variance sigma2 / 2.
Tensor awgn(std::size_t length, double sigma2, Rng& rng);

/// y = x + p + n
Tensor apply_channel(const Tensor& x, const Tensor& p, const Tensor& noise);

/// Received perturbation power for a target PSR: signal_power * 10^(psr_db / 10).
double perturbation_power(Psr psr, double signal_power);

/// Energy of a power-normalized block: mean square 0.5 over 2n components.
constexpr double block_signal_power(unsigned n) { return static_cast<double>(n); }

/// Rotates the n complex samples of `p` by r positions (sample i moves to i + r mod n).
Tensor cyclic_shift(const Tensor& p, std::size_t r);

/// Gaussian jammer: i.i.d. components with variance p_power / length, so E||j||^2 = p_power.
Tensor gaussian_jamming(std::size_t length, double p_power, Rng& rng);

}  // namespace aeattack::channel
