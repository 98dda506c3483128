#include "aeattack/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "aeattack/channel.hpp"
#include "aeattack/errors.hpp"

namespace aeattack::attacks {

using autoencoder::TrainedAutoencoder;

void AttackConfig::validate() const {
  if (number_of_samples < 1) throw ConfigError("attack: number_of_samples must be >= 1");
  if (keep_count < 1 || pool_size < keep_count) {
    throw ConfigError("attack: need pool_size >= keep_count >= 1 (got I=" +
                      std::to_string(pool_size) + ", t=" + std::to_string(keep_count) + ")");
  }
  if (fgm_grid_points < 1) throw ConfigError("attack: fgm grid needs at least one point");
  if (!(fgm_min_fraction > 0.0 && fgm_min_fraction <= 1.0)) {
    throw ConfigError("attack: fgm_min_fraction must lie in (0, 1]");
  }
  if (screening_trials < 1) throw ConfigError("attack: screening_trials must be >= 1");
}

std::optional<Tensor> fgm_perturbation(const TrainedAutoencoder& model, const Tensor& w,
                                       std::size_t s_true, double cap,
                                       const AttackConfig& config) {
  if (!(cap > 0.0)) return std::nullopt;
  const auto& layers = model.arch.decoder;
  const auto& params = model.decoder_params;
  const auto trace = nn::forward(layers, params, w);
  const std::size_t current = nn::argmax(trace.output().values());
  const Tensor grad = nn::backward(layers, params, trace, s_true).input;
  const double gnorm = l2_norm(grad.values());
  if (!(gnorm > 0.0) || !std::isfinite(gnorm)) return std::nullopt;
  const Tensor direction = scaled(grad, 1.0 / gnorm);

  const std::size_t points = config.fgm_grid_points;
  for (std::size_t i = 0; i < points; ++i) {
    const double exponent =
        points == 1 ? 0.0
                    : static_cast<double>(points - 1 - i) / static_cast<double>(points - 1);
    const double alpha = cap * std::pow(config.fgm_min_fraction, exponent);
    Tensor candidate = scaled(direction, alpha);
    const auto probe = nn::forward(layers, params, add(w, candidate));
    if (nn::argmax(probe.output().values()) != current) return candidate;
  }
  return std::nullopt;
}

Perturbation craft_universal(const TrainedAutoencoder& model, double p_power, double sigma2,
                             const AttackConfig& config, Rng& rng) {
  config.validate();
  if (!(p_power > 0.0)) throw ConfigError("craft_universal: p_power must be positive");
  const std::size_t L = model.arch.signal_length();
  const double cap = std::sqrt(p_power);
  const auto book = autoencoder::codebook(model);
  std::uniform_int_distribution<std::size_t> pick(0, model.arch.messages() - 1);

  Tensor p = Tensor::zeros(L);
  std::size_t correct_seen = 0;
  std::size_t updates = 0;
  for (std::size_t iter = 0; iter < config.number_of_samples; ++iter) {
    const std::size_t s = pick(rng);
    const Tensor noise = channel::awgn(L, sigma2, rng);
    const Tensor w = channel::apply_channel(book[s], p, noise);
    if (autoencoder::decode(model, w).message != s) continue;
    ++correct_seen;
    const auto update = fgm_perturbation(model, w, s, cap, config);
    if (!update) continue;
    ++updates;
    Tensor sum = add(p, *update);
    const double power = squared_norm(sum.values());
    p = power <= p_power ? std::move(sum) : scaled(sum, cap / std::sqrt(power));
  }

  Perturbation out;
  out.vector = std::move(p);
  out.p_power = p_power;
  out.no_update_warning = correct_seen == 0;
  out.provenance.attack_kind = "universal";
  out.provenance.parameters = {{"number_of_samples", static_cast<double>(config.number_of_samples)},
                               {"updates_applied", static_cast<double>(updates)},
                               {"sigma2", sigma2},
                               {"fgm_grid_points", static_cast<double>(config.fgm_grid_points)}};
  return out;
}

RowSvd row_normalized_svd(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw ConfigError("svd: no rows");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  RowSvd out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ConfigError("svd: rows of different lengths");
    const double norm = l2_norm(rows[r].values());
    if (!(norm > 0.0)) throw DegenerateInputError("svd: zero row cannot be normalized");
    Tensor unit = scaled(Tensor::vector(rows[r].storage()), 1.0 / norm);
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = unit[c];
    }
    out.normalized_rows.push_back(std::move(unit));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  const auto& v = svd.matrixV();
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    std::vector<double> column(static_cast<std::size_t>(v.rows()));
    for (Eigen::Index r = 0; r < v.rows(); ++r) column[static_cast<std::size_t>(r)] = v(r, c);
    out.right_vectors.push_back(Tensor::vector(std::move(column)));
  }
  return out;
}

namespace {

evaluation::Scenario screening_scenario(std::shared_ptr<const evaluation::LinkSystem> link,
                                        const Tensor& p, double sigma2, std::size_t trials,
                                        std::uint64_t seed) {
  evaluation::Scenario sc;
  sc.id = "screening";
  const unsigned k = link->k(), n = link->n();
  sc.system = std::move(link);
  sc.attack = evaluation::AttackKind::Perturbation;
  sc.perturbation = p;
  sc.shift = evaluation::ShiftPolicy::UniformCyclic;
  const double rate = static_cast<double>(k) / static_cast<double>(n);
  sc.channel = {10.0 * std::log10(1.0 / (2.0 * rate * sigma2)), k, n, sigma2};
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

}  // namespace

Perturbation craft_shift_invariant(const TrainedAutoencoder& substitute, double p_power,
                                   double sigma2, const AttackConfig& config,
                                   ShiftInvariantDetails* details) {
  config.validate();
  if (!(p_power > 0.0)) throw ConfigError("craft_shift_invariant: p_power must be positive");
  if (!(sigma2 > 0.0)) throw ConfigError("craft_shift_invariant: sigma2 must be positive");
  auto link = std::make_shared<const evaluation::AutoencoderLink>(
      std::make_shared<const TrainedAutoencoder>(substitute), "substitute");
  // Common random numbers: every candidate is screened on the same trials.
  const std::uint64_t screen_seed = derive_seed(config.seed, {0x5C4EE7});

  std::vector<Perturbation> pool;
  std::vector<double> blers;
  pool.reserve(config.pool_size);
  for (std::size_t i = 0; i < config.pool_size; ++i) {
    Rng rng = derive_rng(config.seed, {0xC4A7, i});
    pool.push_back(craft_universal(substitute, p_power, sigma2, config, rng));
    const auto& v = pool.back().vector;
    blers.push_back(squared_norm(v.values()) > 0.0
                        ? evaluation::estimate_bler(screening_scenario(link, v, sigma2,
                                                                       config.screening_trials,
                                                                       screen_seed))
                              .bler
                        : -1.0);
  }

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.keep_lowest_bler ? blers[a] < blers[b] : blers[a] > blers[b];
  });
  std::vector<std::size_t> kept;
  std::vector<Tensor> rows;
  for (std::size_t idx : order) {
    if (kept.size() == config.keep_count) break;
    if (blers[idx] < 0.0) continue;  // zero candidate has no direction
    kept.push_back(idx);
    rows.push_back(pool[idx].vector);
  }

  Perturbation out;
  out.p_power = p_power;
  out.provenance.attack_kind = "shift-invariant";
  out.provenance.seed = config.seed;
  out.provenance.parameters = {{"pool_size", static_cast<double>(config.pool_size)},
                               {"keep_count", static_cast<double>(config.keep_count)},
                               {"number_of_samples", static_cast<double>(config.number_of_samples)},
                               {"screening_trials", static_cast<double>(config.screening_trials)},
                               {"keep_lowest_bler", config.keep_lowest_bler ? 1.0 : 0.0},
                               {"sigma2", sigma2}};
  if (rows.empty()) {
    out.vector = Tensor::zeros(substitute.arch.signal_length());
    out.no_update_warning = true;
    return out;
  }

  RowSvd svd = row_normalized_svd(rows);
  const Tensor& v1 = svd.right_vectors.front();
  const double scale = std::sqrt(p_power) / l2_norm(v1.values());
  Tensor plus = scaled(v1, scale);
  Tensor minus = scaled(v1, -scale);
  const double bler_plus =
      evaluation::estimate_bler(
          screening_scenario(link, plus, sigma2, config.screening_trials, screen_seed))
          .bler;
  const double bler_minus =
      evaluation::estimate_bler(
          screening_scenario(link, minus, sigma2, config.screening_trials, screen_seed))
          .bler;
  out.vector = bler_minus > bler_plus ? std::move(minus) : std::move(plus);
  out.provenance.parameters["bler_plus"] = bler_plus;
  out.provenance.parameters["bler_minus"] = bler_minus;

  if (details) {
    details->candidate_blers = blers;
    details->kept = kept;
    details->svd = std::move(svd);
    details->bler_plus = bler_plus;
    details->bler_minus = bler_minus;
  }
  return out;
}

evaluation::Scenario TransferScenario::scenario(std::string id,
                                                const channel::ChannelConfig& channel,
                                                std::optional<double> psr_db, std::size_t trials,
                                                std::uint64_t seed) const {
  evaluation::Scenario sc;
  sc.id = std::move(id);
  sc.system = target;
  sc.attack = evaluation::AttackKind::Perturbation;
  sc.perturbation = perturbation;
  sc.shift = shift;
  sc.channel = channel;
  sc.psr_db = psr_db;
  sc.trials = trials;
  sc.seed = seed;
  return sc;
}

TransferScenario transfer_attack(const Perturbation& crafted,
                                 std::shared_ptr<const evaluation::LinkSystem> target,
                                 evaluation::ShiftPolicy shift) {
  if (!target) throw ConfigError("transfer_attack: no target");
  if (crafted.vector.size() != target->signal_length()) {
    throw ConfigError("transfer_attack: perturbation length " +
                      std::to_string(crafted.vector.size()) + " but target signal length " +
                      std::to_string(target->signal_length()));
  }
  return TransferScenario{std::move(target), crafted.vector, shift, crafted.provenance};
}

}  // namespace aeattack::attacks
