#pragma once

// Physical adversarial perturbations against an autoencoder receiver:
//  - fgm_perturbation: per-input minimal flip along the loss gradient
//  - craft_universal: input-agnostic perturbation built from per-input flips
//  - craft_shift_invariant: principal direction of the most shift-robust
//    universal perturbations (black-box use via a substitute model)

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aeattack/autoencoder.hpp"
#include "aeattack/evaluation.hpp"
#include "aeattack/rng.hpp"
#include "aeattack/tensor.hpp"

namespace aeattack::attacks {

struct Provenance {
  std::string attack_kind;  // "universal" or "shift-invariant"
  std::string substitute_model_id;
  std::uint64_t seed = 0;
  std::map<std::string, double> parameters;
};

struct Perturbation {
  Tensor vector;
  double p_power = 0.0;
  Provenance provenance;
  /// Set when no crafting iteration ever saw a correctly decoded block.
  bool no_update_warning = false;
};

struct AttackConfig {
  std::size_t number_of_samples = 10;
  std::size_t pool_size = 100;  // I
  std::size_t keep_count = 10;  // t
  std::size_t fgm_grid_points = 25;
  double fgm_min_fraction = 1e-3;
  std::size_t screening_trials = 2000;
  /// Literal reading of the candidate selection rule: keep the lowest-BLER candidates.
  bool keep_lowest_bler = false;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Smallest alpha on a geometric grid [cap * fgm_min_fraction, cap] such that
/// g(w + alpha d) != g(w), with d the unit gradient of the loss at (w, s_true).
/// nullopt when the gradient vanishes or no grid point flips the decision.
std::optional<Tensor> fgm_perturbation(const autoencoder::TrainedAutoencoder& model,
                                       const Tensor& w, std::size_t s_true, double cap,
                                       const AttackConfig& config = {});

/// Input-agnostic perturbation with ||p||^2 <= p_power, crafted against the
/// model's own encoder and decoder at noise variance sigma2.
Perturbation craft_universal(const autoencoder::TrainedAutoencoder& model, double p_power,
                             double sigma2, const AttackConfig& config, Rng& rng);

/// Right singular vectors of the stacked rows (unit-normalized inside).
struct RowSvd {
  std::vector<double> singular_values;
  std::vector<Tensor> right_vectors;  // orthonormal, descending singular value
  std::vector<Tensor> normalized_rows;
};
RowSvd row_normalized_svd(const std::vector<Tensor>& rows);

struct ShiftInvariantDetails {
  std::vector<double> candidate_blers;
  std::vector<std::size_t> kept;
  RowSvd svd;
  double bler_plus = 0.0;
  double bler_minus = 0.0;
};

/// Pool of universal perturbations, screened under random cyclic shifts on the
/// substitute, reduced to their principal direction and scaled to sqrt(p_power).
Perturbation craft_shift_invariant(const autoencoder::TrainedAutoencoder& substitute,
                                   double p_power, double sigma2, const AttackConfig& config,
                                   ShiftInvariantDetails* details = nullptr);

/// A perturbation aimed at a target that is only reachable through LinkSystem
/// (encode/decode), together with the shift policy it is evaluated under.
struct TransferScenario {
  std::shared_ptr<const evaluation::LinkSystem> target;
  Tensor perturbation;
  evaluation::ShiftPolicy shift = evaluation::ShiftPolicy::UniformCyclic;
  Provenance provenance;

  /// Evaluation scenario at the given channel point.
  evaluation::Scenario scenario(std::string id, const channel::ChannelConfig& channel,
                                std::optional<double> psr_db, std::size_t trials,
                                std::uint64_t seed) const;
};

TransferScenario transfer_attack(const Perturbation& crafted,
                                 std::shared_ptr<const evaluation::LinkSystem> target,
                                 evaluation::ShiftPolicy shift);

}  // namespace aeattack::attacks
