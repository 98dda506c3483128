#include "aeattack/channel.hpp"

#include <cmath>
#include <string>

#include "aeattack/errors.hpp"

namespace aeattack::channel {

double noise_variance(double ebno_db, unsigned k, unsigned n) {
  if (k == 0 || n == 0) throw ArgumentError("noise_variance: k and n must be positive");
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  return 1.0 / (2.0 * rate * std::pow(10.0, ebno_db / 10.0));
}

namespace {

Tensor gaussian_vector(std::size_t length, double component_variance, Rng& rng) {
  Tensor out = Tensor::zeros(length);
  if (component_variance == 0.0) return out;
  std::normal_distribution<double> dist(0.0, std::sqrt(component_variance));
  for (double& v : out.values()) v = dist(rng);
  return out;
}

}  // namespace

Tensor awgn(std::size_t length, double sigma2, Rng& rng) {
  if (!(sigma2 >= 0.0)) throw ArgumentError("awgn: sigma2 must be non-negative");
  return gaussian_vector(length, sigma2 / 2.0, rng);
}

Tensor apply_channel(const Tensor& x, const Tensor& p, const Tensor& noise) {
  if (x.size() != p.size() || x.size() != noise.size()) {
    throw ConfigError("apply_channel: signal, perturbation and noise lengths differ (" +
                      std::to_string(x.size()) + ", " + std::to_string(p.size()) + ", " +
                      std::to_string(noise.size()) + ")");
  }
  Tensor y = Tensor::vector(x.storage());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += p[i] + noise[i];
  return y;
}

double perturbation_power(Psr psr, double signal_power) {
  if (!(signal_power > 0.0)) throw ArgumentError("perturbation_power: signal power must be > 0");
  return signal_power * std::pow(10.0, psr.db / 10.0);
}

Tensor cyclic_shift(const Tensor& p, std::size_t r) {
  if (p.size() % 2 != 0) throw ArgumentError("cyclic_shift: length must be even");
  const std::size_t n = p.size() / 2;
  if (r >= n) {
    throw ArgumentError("cyclic_shift: shift " + std::to_string(r) + " outside [0, " +
                        std::to_string(n) + ")");
  }
  Tensor out = Tensor::zeros(p.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t dst = (i + r) % n;
    out[2 * dst] = p[2 * i];
    out[2 * dst + 1] = p[2 * i + 1];
  }
  return out;
}

Tensor gaussian_jamming(std::size_t length, double p_power, Rng& rng) {
  if (!(p_power >= 0.0)) throw ArgumentError("gaussian_jamming: power must be non-negative");
  if (length == 0) return Tensor::zeros(0);
  return gaussian_vector(length, p_power / static_cast<double>(length), rng);
}

}  // namespace aeattack::channel
