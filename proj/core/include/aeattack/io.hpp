#pragma once

// JSON artifacts: trained models and perturbations. Numbers are written in
// shortest round-trip form, so save -> load reproduces every double exactly.

#include <filesystem>
#include <string>
#include <string_view>

#include "aeattack/attacks.hpp"
#include "aeattack/autoencoder.hpp"

namespace aeattack::io {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kPerturbationFormatVersion = 1;

std::string model_to_json(const autoencoder::TrainedAutoencoder& model);
/// ConfigError on schema violations (missing fields, inconsistent shapes).
autoencoder::TrainedAutoencoder model_from_json(std::string_view text);

std::string perturbation_to_json(const attacks::Perturbation& p);
attacks::Perturbation perturbation_from_json(std::string_view text);

/// IoError when the file cannot be read or written.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

void save_model(const autoencoder::TrainedAutoencoder& model, const std::filesystem::path& path);
autoencoder::TrainedAutoencoder load_model(const std::filesystem::path& path);
void save_perturbation(const attacks::Perturbation& p, const std::filesystem::path& path);
attacks::Perturbation load_perturbation(const std::filesystem::path& path);

}  // namespace aeattack::io
