#include "aeattack/classical.hpp"

#include <string>

#include "aeattack/errors.hpp"

namespace aeattack::classical {

CodeWord hamming_encode(const DataWord& d) {
  for (auto bit : d) {
    if (bit > 1) throw ArgumentError("hamming_encode: bits must be 0 or 1");
  }
  return {d[0],
          d[1],
          d[2],
          d[3],
          static_cast<std::uint8_t>(d[0] ^ d[1] ^ d[3]),
          static_cast<std::uint8_t>(d[0] ^ d[2] ^ d[3]),
          static_cast<std::uint8_t>(d[1] ^ d[2] ^ d[3])};
}

DataWord message_bits(std::size_t message) {
  if (message >= kMessages) {
    throw ArgumentError("message " + std::to_string(message) + " outside [0, 16)");
  }
  DataWord d{};
  for (std::size_t i = 0; i < kDataBits; ++i) {
    d[i] = static_cast<std::uint8_t>((message >> (kDataBits - 1 - i)) & 1U);
  }
  return d;
}

const HammingCode74& HammingCode74::instance() {
  static const HammingCode74 code = [] {
    HammingCode74 c{};
    for (std::size_t row = 0; row < kDataBits; ++row) {
      DataWord unit{};
      unit[row] = 1;
      c.generator[row] = hamming_encode(unit);
    }
    for (std::size_t m = 0; m < kMessages; ++m) c.codebook[m] = hamming_encode(message_bits(m));
    return c;
  }();
  return code;
}

std::size_t hamming_distance(const CodeWord& a, const CodeWord& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < kCodeBits; ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

Tensor bpsk_modulate(const CodeWord& c) {
  Tensor out = Tensor::zeros(kSignalLength);
  for (std::size_t i = 0; i < kCodeBits; ++i) {
    if (c[i] > 1) throw ArgumentError("bpsk_modulate: bits must be 0 or 1");
    out[2 * i] = c[i] == 0 ? kBpskAmplitude : -kBpskAmplitude;
  }
  return out;
}

const ModulatedCodebook& ModulatedCodebook::instance() {
  static const ModulatedCodebook book = [] {
    ModulatedCodebook b;
    const auto& code = HammingCode74::instance();
    for (std::size_t m = 0; m < kMessages; ++m) b.signals[m] = bpsk_modulate(code.codebook[m]);
    return b;
  }();
  return book;
}

std::size_t mld_decode(const Tensor& y) {
  if (y.size() != kSignalLength) {
    throw ConfigError("mld_decode: expected length 14, got " + std::to_string(y.size()));
  }
  const auto& book = ModulatedCodebook::instance();
  std::size_t best = 0;
  double best_dist = 0.0;
  for (std::size_t m = 0; m < kMessages; ++m) {
    const Tensor& c = book.signals[m];
    double dist = 0.0;
    for (std::size_t i = 0; i < kSignalLength; ++i) {
      const double e = y[i] - c[i];
      dist += e * e;
    }
    if (m == 0 || dist < best_dist) {
      best = m;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace aeattack::classical
