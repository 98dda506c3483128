#pragma once

// Monte Carlo block-error-rate estimation over (system, attack, shift policy,
// Eb/N0, PSR) scenarios. Every trial is a pure function of
// (master seed, grid index, trial index), so results never depend on thread count
// or scheduling.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aeattack/autoencoder.hpp"
#include "aeattack/channel.hpp"
#include "aeattack/tensor.hpp"

namespace aeattack::evaluation {

/// A transmitter/receiver pair seen as a black box: message in, signal out;
/// signal in, decision out. No gradients are reachable through this interface.
class LinkSystem {
 public:
  virtual ~LinkSystem() = default;
  virtual std::string name() const = 0;
  virtual unsigned k() const = 0;
  virtual unsigned n() const = 0;
  virtual const Tensor& transmit(std::size_t message) const = 0;
  virtual std::size_t receive(const Tensor& y) const = 0;

  std::size_t messages() const { return std::size_t{1} << k(); }
  std::size_t signal_length() const { return 2 * std::size_t{n()}; }
};

class AutoencoderLink final : public LinkSystem {
 public:
  AutoencoderLink(std::shared_ptr<const autoencoder::TrainedAutoencoder> model, std::string name);

  std::string name() const override { return name_; }
  unsigned k() const override { return model_->arch.k; }
  unsigned n() const override { return model_->arch.n; }
  const Tensor& transmit(std::size_t message) const override;
  std::size_t receive(const Tensor& y) const override;

 private:
  std::shared_ptr<const autoencoder::TrainedAutoencoder> model_;
  std::string name_;
  std::vector<Tensor> codebook_;
};

class ClassicalLink final : public LinkSystem {
 public:
  std::string name() const override { return "classical"; }
  unsigned k() const override { return 4; }
  unsigned n() const override { return 7; }
  const Tensor& transmit(std::size_t message) const override;
  std::size_t receive(const Tensor& y) const override;
};

enum class AttackKind { None, Jamming, Perturbation };
enum class ShiftPolicy { None, UniformCyclic };

std::string_view to_string(AttackKind kind);
std::string_view to_string(ShiftPolicy policy);
AttackKind parse_attack_kind(std::string_view name);
ShiftPolicy parse_shift_policy(std::string_view name);

struct Scenario {
  std::string id;
  std::shared_ptr<const LinkSystem> system;
  AttackKind attack = AttackKind::None;
  /// The fixed vector for AttackKind::Perturbation.
  Tensor perturbation;
  ShiftPolicy shift = ShiftPolicy::None;
  channel::ChannelConfig channel;
  /// Required for jamming (sets the jammer power); recorded for other attacks.
  std::optional<double> psr_db;
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  /// Position on the Eb/N0 grid; part of the per-trial seed path.
  std::size_t grid_index = 0;

  void validate() const;
};

/// Everything a trial drew and decided; run_trial is the error bit of this.
struct TrialRecord {
  std::size_t message = 0;
  std::size_t shift = 0;
  Tensor attack;
  Tensor noise;
  std::size_t decided = 0;
  bool error() const noexcept { return decided != message; }
};

enum class TrialResult { Correct, Error };

TrialRecord trace_trial(const Scenario& scenario, std::uint64_t trial_index);
TrialResult run_trial(const Scenario& scenario, std::uint64_t trial_index);

struct BlerPoint {
  double ebno_db = 0.0;
  double bler = 0.0;
  /// 95% normal-approximation half-width, 1.96 sqrt(b (1 - b) / trials).
  double ci95 = 0.0;
  std::size_t trials = 0;
  std::size_t errors = 0;

  double lower() const noexcept;
  /// bler + ci95, or the rule-of-three bound 3 / trials when no errors were seen.
  double upper() const noexcept;
};

double ci_halfwidth(double bler, std::size_t trials);
BlerPoint make_point(double ebno_db, std::size_t errors, std::size_t trials);

struct EvalOptions {
  unsigned threads = 1;
};

BlerPoint estimate_bler(const Scenario& scenario, EvalOptions options = {});

struct BlerCurve {
  std::string scenario_id;
  std::string system;
  std::string attack;
  std::string shift_policy;
  std::optional<double> psr_db;
  std::uint64_t seed = 0;
  std::vector<BlerPoint> points;
};

/// One point per grid value; the template's channel Eb/N0 and grid_index are overridden.
BlerCurve sweep(const Scenario& scenario_template, std::span<const double> ebno_grid,
                EvalOptions options = {});

/// Eb/N0 values from `first` to `last` inclusive.
std::vector<double> ebno_range(double first, double last, double step = 1.0);

void write_csv_header(std::ostream& out);
void write_csv_rows(std::ostream& out, const BlerCurve& curve);
std::vector<BlerCurve> read_csv(std::istream& in);

enum class Dominance { Greater, Less, Indistinct };
std::string_view to_string(Dominance d);

/// Interval comparison of two points: Greater when a.lower() > b.upper().
Dominance dominance(const BlerPoint& a, const BlerPoint& b);

struct ComparisonRow {
  double ebno_db = 0.0;
  double bler_a = 0.0;
  double bler_b = 0.0;
  /// bler_a / bler_b; 1 when both are 0, +inf when only b is 0.
  double ratio = 1.0;
  Dominance verdict = Dominance::Indistinct;
};

struct Comparison {
  std::string a;
  std::string b;
  std::vector<ComparisonRow> rows;
};

struct ComparisonReport {
  std::vector<Comparison> comparisons;

  std::string to_text() const;
  std::string to_json() const;
};

/// ConfigError when the two curves are not on the same Eb/N0 grid.
Comparison compare(const BlerCurve& a, const BlerCurve& b);

/// Ratios and dominance verdicts for each named (a, b) pair. Unknown ids raise
/// ConfigError listing the available ids.
ComparisonReport compare_report(std::span<const BlerCurve> curves,
                                std::span<const std::pair<std::string, std::string>> pairs);

}  // namespace aeattack::evaluation
