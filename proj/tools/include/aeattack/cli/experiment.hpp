#pragma once

// Declarative experiment description for `evaluate`: which models to load or
// train, which perturbations to load or craft, and which scenarios to sweep.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeattack/attacks.hpp"
#include "aeattack/autoencoder.hpp"
#include "aeattack/evaluation.hpp"

namespace aeattack::cli {

struct TrainSpec {
  autoencoder::ArchName arch = autoencoder::ArchName::MLP;
  unsigned k = 4;
  unsigned n = 7;
  autoencoder::TrainConfig config;
};

enum class CraftKind { Universal, ShiftInvariant };
std::string_view to_string(CraftKind kind);
CraftKind parse_craft_kind(std::string_view name);

struct CraftSpec {
  std::string model;  // model id (config) or substitute id (provenance)
  CraftKind kind = CraftKind::Universal;
  double psr_db = -6.0;
  double ebno_db = 7.0;
  attacks::AttackConfig config;
};

struct ModelEntry {
  std::string id;
  std::optional<std::string> path;
  std::optional<TrainSpec> train;
};

struct PerturbationEntry {
  std::string id;
  std::optional<std::string> path;
  std::optional<CraftSpec> craft;
};

struct ScenarioEntry {
  std::string id;
  std::string system;  // a model id or "classical"
  evaluation::AttackKind attack = evaluation::AttackKind::None;
  std::string perturbation;
  evaluation::ShiftPolicy shift = evaluation::ShiftPolicy::None;
  std::optional<double> psr_db;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 100000;
  std::vector<double> ebno_db;
  std::vector<ModelEntry> models;
  std::vector<PerturbationEntry> perturbations;
  std::vector<ScenarioEntry> scenarios;
  /// Relative artifact paths resolve against this directory.
  std::filesystem::path base_dir;

  /// ConfigError carrying the JSON path of the offending field, e.g. "scenarios[2].attack".
  static ExperimentConfig parse(std::string_view text, std::filesystem::path base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Fully explicit form; parse(dump()) reproduces the same experiment.
  std::string dump() const;
};

autoencoder::TrainedAutoencoder train_model(const TrainSpec& spec);

/// Runs the crafting algorithm selected by spec.kind with spec.config.seed.
attacks::Perturbation craft_perturbation(const autoencoder::TrainedAutoencoder& substitute,
                                         const CraftSpec& spec);

/// Loads or builds every artifact, then sweeps each scenario over the grid.
std::vector<evaluation::BlerCurve> run_experiment(const ExperimentConfig& config,
                                                  evaluation::EvalOptions options,
                                                  std::ostream* log = nullptr);

}  // namespace aeattack::cli
