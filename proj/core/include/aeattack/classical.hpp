#pragma once

// BPSK + systematic Hamming(7,4) + soft-decision maximum-likelihood baseline.
// The modulated signal lives in the same 14-dimensional interleaved (re, im)
// space as the autoencoder output, with BPSK on the real slots only, so that
// perturbation and jamming vectors apply to both systems unchanged.

#include <array>
#include <cstddef>
#include <cstdint>

#include "aeattack/tensor.hpp"

namespace aeattack::classical {

inline constexpr std::size_t kDataBits = 4;
inline constexpr std::size_t kCodeBits = 7;
inline constexpr std::size_t kMessages = 16;
inline constexpr std::size_t kSignalLength = 2 * kCodeBits;

/// Per-symbol BPSK amplitude: one unit of energy per channel use, the same
/// per-channel-use energy an autoencoder block carries (0.5 per real component).
inline constexpr double kBpskAmplitude = 1.0;

using DataWord = std::array<std::uint8_t, kDataBits>;
using CodeWord = std::array<std::uint8_t, kCodeBits>;

/// c = [d1 d2 d3 d4 p1 p2 p3], p1 = d1^d2^d4, p2 = d1^d3^d4, p3 = d2^d3^d4.
CodeWord hamming_encode(const DataWord& d);

/// Message index m -> data bits, most significant bit first (m = 8 d1 + 4 d2 + 2 d3 + d4).
DataWord message_bits(std::size_t message);

struct HammingCode74 {
  /// Systematic generator G = [I4 | P], rows are the images of unit data words.
  std::array<CodeWord, kDataBits> generator;
  std::array<CodeWord, kMessages> codebook;

  static const HammingCode74& instance();
};

std::size_t hamming_distance(const CodeWord& a, const CodeWord& b);

/// Bit 0 -> +A, bit 1 -> -A on even (real) slots; odd (imaginary) slots stay 0.
Tensor bpsk_modulate(const CodeWord& c);

struct ModulatedCodebook {
  std::array<Tensor, kMessages> signals;
  static const ModulatedCodebook& instance();
};

/// argmin_m ||y - c_m||^2 over all 16 modulated codewords, lowest index on ties.
std::size_t mld_decode(const Tensor& y);

}  // namespace aeattack::classical
