// Acceptance suite: one PASS/FAIL line per criterion, measured values alongside.
// Exit status is 0 when every criterion was evaluated (whatever the verdicts);
// --strict makes any FAIL a non-zero exit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aeattack/attacks.hpp"
#include "aeattack/autoencoder.hpp"
#include "aeattack/channel.hpp"
#include "aeattack/classical.hpp"
#include "aeattack/cli/commands.hpp"
#include "aeattack/evaluation.hpp"
#include "aeattack/io.hpp"
#include "oracles.hpp"

using namespace aeattack;
using evaluation::AttackKind;
using evaluation::BlerCurve;
using evaluation::Dominance;
using evaluation::Scenario;
using evaluation::ShiftPolicy;

namespace {

constexpr double kPsrDb = -6.0;
constexpr double kCraftEbNoDb = 7.0;
constexpr std::uint64_t kMlpSeed = 2;
constexpr std::uint64_t kCnnSeed = 1;
constexpr std::uint64_t kEvalSeed = 2024;

constexpr double kParityDb = 1.0;
constexpr std::size_t kParityTrials = 1000000;
constexpr std::size_t kCurveTrials = 100000;
constexpr std::size_t kRatioTrials = 1000000;
constexpr double kMinDegradation = 10.0;
constexpr double kClassicalRatioLow = 0.5;
constexpr double kClassicalRatioHigh = 2.0;
constexpr double kClassicalFloor = 1e-4;
constexpr std::size_t kClassicalTrials = 1000000;
constexpr double kPropertySeconds = 60.0;
constexpr double kFdTolerance = 1e-5;
constexpr double kConvTolerance = 1e-12;
constexpr double kPowerTolerance = 1e-12;
constexpr double kBudgetSlack = 1e-9;
constexpr double kOrthoTolerance = 1e-10;
constexpr double kRank1Tolerance = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdict {
  int number = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

void report(const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << v.number << " (" << v.title
            << "): " << v.detail << std::endl;
}

void table(const std::string& label_a, const BlerCurve& a, const std::string& label_b,
           const BlerCurve& b) {
  std::cout << "    Eb/N0  " << label_a << "  " << label_b << "\n";
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    std::cout << "    " << fmt("%5.1f", pa.ebno_db) << "  " << fmt("%.3e", pa.bler) << " +- "
              << fmt("%.1e", pa.ci95) << "  " << fmt("%.3e", pb.bler) << " +- "
              << fmt("%.1e", pb.ci95) << "  " << evaluation::to_string(evaluation::dominance(pa, pb))
              << "\n";
  }
  std::cout.flush();
}

/// Eb/N0 where the curve first falls below `target`, interpolating log10(BLER) linearly.
std::optional<double> crossing(const BlerCurve& c, double target) {
  for (std::size_t i = 0; i + 1 < c.points.size(); ++i) {
    const auto& a = c.points[i];
    const auto& b = c.points[i + 1];
    if (a.bler >= target && b.bler < target) {
      const double la = std::log10(a.bler);
      const double lb = std::log10(std::max(b.bler, 0.5 / static_cast<double>(b.trials)));
      return a.ebno_db + (la - std::log10(target)) / (la - lb) * (b.ebno_db - a.ebno_db);
    }
  }
  return std::nullopt;
}

BlerCurve run_curve(Scenario sc, const std::vector<double>& grid) {
  const auto t0 = Clock::now();
  auto curve = evaluation::sweep(sc, grid);
  std::cout << "  swept " << sc.id << " (" << grid.size() << " points x " << sc.trials
            << " trials) in " << fmt("%.1f", seconds_since(t0)) << " s" << std::endl;
  return curve;
}

Scenario scenario(std::string id, std::shared_ptr<const evaluation::LinkSystem> link,
                  std::size_t trials) {
  Scenario sc;
  sc.id = std::move(id);
  sc.system = std::move(link);
  sc.channel = channel::ChannelConfig::make(0.0, 4, 7);
  sc.trials = trials;
  sc.seed = kEvalSeed;
  return sc;
}

Scenario with_jamming(Scenario sc) {
  sc.id += "_jam";
  sc.attack = AttackKind::Jamming;
  sc.psr_db = kPsrDb;
  return sc;
}

Scenario with_perturbation(Scenario sc, const Tensor& p, ShiftPolicy shift) {
  sc.id += shift == ShiftPolicy::None ? "_adv" : "_adv_shifted";
  sc.attack = AttackKind::Perturbation;
  sc.perturbation = p;
  sc.shift = shift;
  sc.psr_db = kPsrDb;
  return sc;
}

std::vector<BlerCurve> g_curves;

BlerCurve keep(BlerCurve c) {
  g_curves.push_back(c);
  return c;
}

struct Models {
  std::shared_ptr<const autoencoder::TrainedAutoencoder> mlp;
  std::shared_ptr<const autoencoder::TrainedAutoencoder> cnn;
  std::shared_ptr<const evaluation::LinkSystem> mlp_link;
  std::shared_ptr<const evaluation::LinkSystem> cnn_link;
  std::shared_ptr<const evaluation::LinkSystem> classical;
};

std::shared_ptr<const autoencoder::TrainedAutoencoder> train(const autoencoder::AutoencoderArch& arch,
                                                            std::uint64_t seed) {
  autoencoder::TrainConfig cfg;
  cfg.seed = seed;
  const auto t0 = Clock::now();
  auto model = std::make_shared<const autoencoder::TrainedAutoencoder>(autoencoder::train(arch, cfg));
  std::cout << "  trained " << autoencoder::to_string(arch.name) << " (seed " << seed << ") in "
            << fmt("%.1f", seconds_since(t0)) << " s, final loss " << fmt("%.4g", model->final_loss)
            << ", clean accuracy " << autoencoder::clean_accuracy(*model) << std::endl;
  return model;
}

Verdict criterion_parity(const Models& m) {
  const auto grid = evaluation::ebno_range(0.0, 10.0);
  const auto mlp = keep(run_curve(scenario("mlp_clean", m.mlp_link, kParityTrials), grid));
  const auto cls = keep(run_curve(scenario("classical_clean", m.classical, kParityTrials), grid));
  table("mlp clean          ", mlp, "classical clean    ", cls);
  Verdict v{1, "training parity", true, ""};
  for (double target : {1e-2, 1e-3}) {
    const auto a = crossing(mlp, target);
    const auto b = crossing(cls, target);
    v.detail += "BLER " + fmt("%.0e", target) + ": ";
    if (!a || !b) {
      v.pass = false;
      v.detail += "no crossing on the grid; ";
      continue;
    }
    const double gap = std::abs(*a - *b);
    v.pass = v.pass && gap <= kParityDb;
    v.detail += "mlp " + fmt("%.2f", *a) + " dB, classical " + fmt("%.2f", *b) + " dB, gap " +
                fmt("%.2f", gap) + " dB; ";
  }
  v.detail += "limit " + fmt("%.1f", kParityDb) + " dB";
  return v;
}

Verdict criterion_adv_vs_jam(const Models& m, const Tensor& p) {
  const auto grid = evaluation::ebno_range(4.0, 12.0);
  const auto base = scenario("mlp", m.mlp_link, kCurveTrials);
  const auto adv = keep(run_curve(with_perturbation(base, p, ShiftPolicy::None), grid));
  const auto jam = keep(run_curve(with_jamming(base), grid));
  table("mlp adversarial    ", adv, "mlp jamming        ", jam);
  Verdict v{2, "adversarial beats jamming on the MLP", true, ""};
  std::size_t separated = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (evaluation::dominance(adv.points[i], jam.points[i]) == Dominance::Greater) {
      ++separated;
    } else {
      v.pass = false;
      v.detail += "not separated at " + fmt("%.0f", grid[i]) + " dB; ";
    }
  }
  v.detail += std::to_string(separated) + "/" + std::to_string(grid.size()) +
              " points with adv CI above jam CI (4..12 dB)";
  return v;
}

Verdict criterion_degradation(const Models& m, const Tensor& p) {
  const std::vector<double> grid{10.0};
  const auto base = scenario("mlp_10db", m.mlp_link, kRatioTrials);
  const auto clean = run_curve(base, grid).points[0];
  const auto adv = run_curve(with_perturbation(base, p, ShiftPolicy::None), grid).points[0];
  // With no clean errors the ratio uses the rule-of-three upper bound, so it can only understate.
  const double denom = clean.errors == 0 ? clean.upper() : clean.bler;
  const double ratio = adv.bler / denom;
  Verdict v{3, "orders-of-magnitude degradation", ratio >= kMinDegradation, ""};
  v.detail = "clean " + fmt("%.3e", clean.bler) + " (" + std::to_string(clean.errors) +
             " errors), adversarial " + fmt("%.3e", adv.bler) + ", ratio " +
             (clean.errors == 0 ? ">= " : "") + fmt("%.1f", ratio) + " (floor " +
             fmt("%.0f", kMinDegradation) + ")";
  return v;
}

struct TransferCurves {
  BlerCurve cnn_adv;
  BlerCurve cnn_jam;
};

Verdict criterion_transfer(const Models& m, const Tensor& p, TransferCurves& out) {
  const auto grid = evaluation::ebno_range(4.0, 12.0);
  const auto base = scenario("cnn", m.cnn_link, kCurveTrials);
  out.cnn_adv = keep(run_curve(with_perturbation(base, p, ShiftPolicy::UniformCyclic), grid));
  out.cnn_jam = keep(run_curve(with_jamming(base), grid));
  table("cnn adv shifted    ", out.cnn_adv, "cnn jamming        ", out.cnn_jam);
  Verdict v{4, "shifted black-box transfer to the CNN", true, ""};
  std::size_t separated = 0, considered = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 6.0) continue;
    ++considered;
    const auto d = evaluation::dominance(out.cnn_adv.points[i], out.cnn_jam.points[i]);
    if (d == Dominance::Greater) {
      ++separated;
    } else {
      v.pass = false;
    }
  }
  const auto& at6 = out.cnn_adv.points[2];
  const auto& jam6 = out.cnn_jam.points[2];
  v.detail = std::to_string(separated) + "/" + std::to_string(considered) +
             " points with adv CI above jam CI (6..12 dB); at 6 dB adv " + fmt("%.3e", at6.bler) +
             " vs jam " + fmt("%.3e", jam6.bler);
  return v;
}

Verdict criterion_classical(const Models& m, const Tensor& p, const TransferCurves& cnn) {
  const auto grid = evaluation::ebno_range(0.0, 12.0);
  const auto base = scenario("classical", m.classical, kClassicalTrials);
  const auto adv = keep(run_curve(with_perturbation(base, p, ShiftPolicy::UniformCyclic), grid));
  const auto jam = keep(run_curve(with_jamming(base), grid));
  table("classical adv shift", adv, "classical jamming  ", jam);

  bool a_pass = true;
  std::size_t a_points = 0;
  double worst_low = 1e300, worst_high = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double ba = adv.points[i].bler, bj = jam.points[i].bler;
    if (ba <= kClassicalFloor || bj <= kClassicalFloor) continue;
    ++a_points;
    const double r = ba / bj;
    worst_low = std::min(worst_low, r);
    worst_high = std::max(worst_high, r);
    if (r < kClassicalRatioLow || r > kClassicalRatioHigh) a_pass = false;
  }
  if (a_points == 0) a_pass = false;

  bool b_pass = true;
  std::size_t b_points = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 4.0 || grid[i] > 10.0) continue;
    const auto& c = cnn.cnn_jam.points[static_cast<std::size_t>(grid[i] - 4.0)];
    if (evaluation::dominance(c, jam.points[i]) == Dominance::Greater) {
      ++b_points;
    } else {
      b_pass = false;
    }
  }

  Verdict v{5, "classical robustness", a_pass && b_pass, ""};
  v.detail = std::string("(a) ") + (a_pass ? "pass" : "fail") + ": adv-shifted/jam ratio in [" +
             fmt("%.2f", a_points ? worst_low : 0.0) + ", " + fmt("%.2f", worst_high) + "] over " +
             std::to_string(a_points) + " points above 1e-4 (allowed [0.5, 2.0]); (b) " +
             (b_pass ? "pass" : "fail") + ": classical jam below CNN jam at " +
             std::to_string(b_points) + "/7 points (4..10 dB)";
  return v;
}

// Numerical property suite. Each check returns an empty string on success.
Verdict criterion_properties() {
  const auto t0 = Clock::now();
  std::vector<std::pair<std::string, std::function<std::string()>>> checks;

  checks.emplace_back("gradients vs finite differences", [] {
    Rng rng(101);
    double worst = 0.0;
    std::vector<std::vector<nn::LayerSpec>> nets{
        autoencoder::build_mlp(4, 7).decoder, autoencoder::build_cnn(4, 7).decoder,
        {nn::LayerSpec::dense(16, 14, nn::Activation::ELU), nn::LayerSpec::normalize(14),
         nn::LayerSpec::dense(14, 16, nn::Activation::Softmax)}};
    for (const auto& layers : nets) {
      const auto params = nn::init_params(layers, rng);
      for (int rep = 0; rep < 2; ++rep) {
        Tensor x = channel::awgn(layers.front().input_dim, 2.0, rng);
        const std::size_t label = static_cast<std::size_t>(rep * 5) % layers.back().output_dim;
        const auto g = nn::backward(layers, params, nn::forward(layers, params, x), label);
        const auto fd_in = oracle::fd_input_grad(layers, params, x, label);
        for (std::size_t i = 0; i < x.size(); ++i) {
          worst = std::max(worst, oracle::relative_error(g.input[i], fd_in[i]));
        }
        const auto fd_p = oracle::fd_param_grad(layers, params, x, label);
        for (std::size_t l = 0; l < params.size(); ++l) {
          for (std::size_t i = 0; i < params[l].weights.size(); ++i) {
            worst = std::max(worst, oracle::relative_error(g.params[l].weights[i], fd_p[l].weights[i]));
          }
          for (std::size_t i = 0; i < params[l].biases.size(); ++i) {
            worst = std::max(worst, oracle::relative_error(g.params[l].biases[i], fd_p[l].biases[i]));
          }
        }
      }
    }
    return worst < kFdTolerance ? "" : "worst relative error " + fmt("%.2e", worst);
  });

  checks.emplace_back("convolution vs direct summation", [] {
    Rng rng(102);
    double worst = 0.0;
    const auto arch = autoencoder::build_cnn(4, 7);
    std::vector<nn::LayerSpec> convs;
    for (const auto* block : {&arch.encoder, &arch.decoder}) {
      for (const auto& l : *block) {
        if (l.kind == nn::LayerKind::Conv1D || l.kind == nn::LayerKind::Conv2D) convs.push_back(l);
      }
    }
    for (auto l : convs) {
      l.activation = nn::Activation::Linear;
      const std::vector<nn::LayerSpec> one{l};
      auto params = nn::init_params(one, rng);
      for (auto& b : params[0].biases.values()) b = std::uniform_real_distribution<double>(-1, 1)(rng);
      const Tensor x = channel::awgn(l.input_dim, 2.0, rng);
      const auto z = nn::forward(one, params, x).output();
      const auto ref = oracle::naive_conv(x.storage(), params[0].weights.storage(),
                                          params[0].biases.storage(), l.in_channels, l.height,
                                          l.width, l.filter_count, l.kernel_h, l.kernel_w);
      for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(z[i] - ref[i]));
    }
    return worst < kConvTolerance ? "" : "max deviation " + fmt("%.2e", worst);
  });

  checks.emplace_back("Hamming minimum distance", [] {
    const auto& code = classical::HammingCode74::instance();
    std::size_t dmin = 99;
    for (std::size_t a = 0; a < 16; ++a) {
      for (std::size_t b = a + 1; b < 16; ++b) {
        dmin = std::min(dmin, classical::hamming_distance(code.codebook[a], code.codebook[b]));
      }
    }
    return dmin == 3 ? "" : "d_min " + std::to_string(dmin);
  });

  checks.emplace_back("MLD lowest-index tie-break", [] {
    const auto& book = classical::ModulatedCodebook::instance();
    const auto& code = classical::HammingCode74::instance();
    for (std::size_t a = 0; a < 16; ++a) {
      for (std::size_t b = a + 1; b < 16; ++b) {
        if (classical::hamming_distance(code.codebook[a], code.codebook[b]) != 3) continue;
        const Tensor mid = scaled(add(book.signals[a], book.signals[b]), 0.5);
        for (int rep = 0; rep < 3; ++rep) {
          if (classical::mld_decode(mid) != a) return std::string("tie not resolved to lowest index");
        }
      }
    }
    return std::string();
  });

  checks.emplace_back("power normalization", [] {
    double worst = 0.0;
    for (const auto& arch : {autoencoder::build_mlp(4, 7), autoencoder::build_cnn(4, 7)}) {
      Rng rng(103);
      autoencoder::TrainedAutoencoder model;
      model.arch = arch;
      model.encoder_params = nn::init_params(arch.encoder, rng);
      model.decoder_params = nn::init_params(arch.decoder, rng);
      for (std::size_t s = 0; s < 16; ++s) {
        const Tensor x = autoencoder::encode(model, s);
        worst = std::max(worst, std::abs(squared_norm(x.values()) / 14.0 - 0.5));
      }
    }
    return worst < kPowerTolerance ? "" : "mean-square deviation " + fmt("%.2e", worst);
  });

  checks.emplace_back("perturbation budget", [] {
    Rng rng(104);
    const auto arch = autoencoder::build_mlp(4, 7);
    autoencoder::TrainConfig cfg;
    cfg.epochs = 500;
    cfg.seed = 104;
    const auto model = autoencoder::train(arch, cfg);
    const double sigma2 = channel::noise_variance(kCraftEbNoDb, 4, 7);
    double worst = -1e300;
    for (double psr : {-20.0, -6.0, 0.0, 6.0}) {
      const double budget = channel::perturbation_power({psr}, 7.0);
      for (int s = 0; s < 3; ++s) {
        const auto p = attacks::craft_universal(model, budget, sigma2, {}, rng);
        worst = std::max(worst, squared_norm(p.vector.values()) - budget);
      }
      attacks::AttackConfig small;
      small.pool_size = 4;
      small.keep_count = 2;
      small.screening_trials = 200;
      const auto si = attacks::craft_shift_invariant(model, budget, sigma2, small);
      worst = std::max(worst, squared_norm(si.vector.values()) - budget);
    }
    return worst <= kBudgetSlack ? "" : "budget exceeded by " + fmt("%.2e", worst);
  });

  checks.emplace_back("SVD orthonormality and rank-1 case", [] {
    Rng rng(105);
    std::vector<Tensor> rows;
    for (int r = 0; r < 10; ++r) rows.push_back(channel::awgn(14, 1.0, rng));
    const auto svd = attacks::row_normalized_svd(rows);
    double ortho = 0.0;
    for (std::size_t i = 0; i < svd.right_vectors.size(); ++i) {
      for (std::size_t j = 0; j < svd.right_vectors.size(); ++j) {
        double d = 0.0;
        for (std::size_t c = 0; c < 14; ++c) d += svd.right_vectors[i][c] * svd.right_vectors[j][c];
        ortho = std::max(ortho, std::abs(d - (i == j ? 1.0 : 0.0)));
      }
    }
    for (const auto& r : svd.normalized_rows) {
      ortho = std::max(ortho, std::abs(l2_norm(r.values()) - 1.0));
    }
    const std::vector<Tensor> single{rows[0]};
    const auto one = attacks::row_normalized_svd(single);
    const double norm = l2_norm(rows[0].values());
    const double sign = one.right_vectors[0][0] * rows[0][0] >= 0 ? 1.0 : -1.0;
    double rank1 = 0.0;
    for (std::size_t c = 0; c < 14; ++c) {
      rank1 = std::max(rank1, std::abs(one.right_vectors[0][c] - sign * rows[0][c] / norm));
    }
    if (ortho >= kOrthoTolerance) return "orthonormality error " + fmt("%.2e", ortho);
    return rank1 < kRank1Tolerance ? "" : "rank-1 deviation " + fmt("%.2e", rank1);
  });

  checks.emplace_back("noise variance spot values", [] {
    const double a = channel::noise_variance(0.0, 4, 7);
    const double b = channel::noise_variance(7.0, 4, 7);
    if (std::abs(a - 0.875) > 1e-15) return "0 dB gives " + fmt("%.17g", a);
    return std::abs(b - 0.17459) < 5e-6 ? "" : "7 dB gives " + fmt("%.17g", b);
  });

  checks.emplace_back("estimator unbiasedness", [] {
    for (double q : {0.1, 0.01}) {
      Scenario sc;
      sc.id = "coin";
      sc.system = std::make_shared<oracle::CoinFlipLink>(q, 1.0);
      sc.channel = {0.0, 1, 1, 1.0};
      sc.trials = 1000000;
      sc.seed = 106;
      const auto p = evaluation::estimate_bler(sc);
      if (std::abs(p.bler - q) >= 3.0 * p.ci95) {
        return "q " + fmt("%g", q) + " estimated " + fmt("%.5f", p.bler);
      }
    }
    return std::string();
  });

  std::size_t passed = 0;
  std::string failures;
  for (const auto& [name, check] : checks) {
    const auto tc = Clock::now();
    std::string problem;
    try {
      problem = check();
    } catch (const std::exception& e) {
      problem = std::string("threw: ") + e.what();
    }
    std::cout << "    " << (problem.empty() ? "ok  " : "BAD ") << name << " ("
              << fmt("%.2f", seconds_since(tc)) << " s)" << (problem.empty() ? "" : ": " + problem)
              << "\n";
    if (problem.empty()) {
      ++passed;
    } else {
      failures += name + "; ";
    }
  }
  const double elapsed = seconds_since(t0);
  Verdict v{6, "numerical property suite", passed == checks.size() && elapsed < kPropertySeconds, ""};
  v.detail = std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks in " +
             fmt("%.1f", elapsed) + " s (limit " + fmt("%.0f", kPropertySeconds) + " s)";
  if (!failures.empty()) v.detail += "; failed: " + failures;
  return v;
}

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "aeattack");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cout << "    command failed (" << code << "): " << err.str();
  return code;
}

Verdict criterion_determinism(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto at = [&](const std::string& name) { return (dir / name).string(); };
  auto same = [&](const std::string& a, const std::string& b) {
    return io::read_text_file(at(a)) == io::read_text_file(at(b));
  };
  Verdict v{7, "determinism", true, ""};
  auto expect = [&](bool ok, const std::string& what) {
    std::cout << "    " << (ok ? "ok  " : "BAD ") << what << "\n";
    if (!ok) {
      v.pass = false;
      v.detail += what + " differs; ";
    }
  };

  for (const char* name : {"mlp_a.json", "mlp_b.json"}) {
    if (cli_run({"train", "--epochs", "1000", "--seed", "7", "--out", at(name)}) != 0) {
      return {7, "determinism", false, "train failed"};
    }
  }
  expect(same("mlp_a.json", "mlp_b.json"), "model JSON across reruns");
  for (const char* name : {"uni_a.json", "uni_b.json"}) {
    cli_run({"craft", "--model", at("mlp_a.json"), "--kind", "universal", "--seed", "8", "--out",
             at(name)});
  }
  expect(same("uni_a.json", "uni_b.json"), "universal perturbation JSON across reruns");
  for (const char* name : {"si_a.json", "si_b.json"}) {
    cli_run({"craft", "--model", at("mlp_a.json"), "--kind", "shift-invariant", "--seed", "9",
             "--pool", "8", "--keep", "3", "--screening-trials", "500", "--out", at(name)});
  }
  expect(same("si_a.json", "si_b.json"), "shift-invariant perturbation JSON across reruns");

  io::write_text_file(at("experiment.json"), R"({
  "seed": 31,
  "trials": 20000,
  "ebno_db": {"first": 0, "last": 8, "step": 2},
  "models": [{"id": "mlp", "path": "mlp_a.json"}],
  "perturbations": [
    {"id": "uni", "path": "uni_a.json"},
    {"id": "si", "path": "si_a.json"}
  ],
  "scenarios": [
    {"id": "mlp_clean", "system": "mlp"},
    {"id": "mlp_jam", "system": "mlp", "attack": "jamming", "psr_db": -6},
    {"id": "mlp_adv", "system": "mlp", "attack": "perturbation", "perturbation": "uni"},
    {"id": "classical_adv_shifted", "system": "classical", "attack": "perturbation",
     "perturbation": "si", "shift_policy": "uniform_cyclic"},
    {"id": "classical_jam", "system": "classical", "attack": "jamming", "psr_db": -6}
  ]
})");
  cli_run({"evaluate", "--config", at("experiment.json"), "--out", at("r1.csv")});
  cli_run({"evaluate", "--config", at("experiment.json"), "--out", at("r2.csv")});
  cli_run({"evaluate", "--config", at("experiment.json"), "--out", at("r4.csv"), "--threads", "4"});
  expect(same("r1.csv", "r2.csv"), "results CSV across reruns");
  expect(same("r1.csv", "r4.csv"), "results CSV between --threads 1 and 4");
  if (v.pass) v.detail = "train, craft (both kinds) and evaluate outputs byte-identical; CSV invariant to --threads";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  bool strict = false;
  std::string out_dir = "acceptance_out";
  app.add_flag("--strict", strict, "Exit non-zero when any criterion fails");
  app.add_option("--out-dir", out_dir, "Scratch directory for artifacts and result curves");
  CLI11_PARSE(app, argc, argv);

  const auto t0 = Clock::now();
  std::vector<Verdict> verdicts;
  try {
    std::cout << "criterion 6: numerical property suite" << std::endl;
    verdicts.push_back(criterion_properties());
    report(verdicts.back());

    std::cout << "criterion 7: determinism" << std::endl;
    verdicts.push_back(criterion_determinism(std::filesystem::path(out_dir) / "cli"));
    report(verdicts.back());

    std::cout << "models" << std::endl;
    Models m;
    m.mlp = train(autoencoder::build_mlp(4, 7), kMlpSeed);
    m.cnn = train(autoencoder::build_cnn(4, 7), kCnnSeed);
    m.mlp_link = std::make_shared<evaluation::AutoencoderLink>(m.mlp, "mlp");
    m.cnn_link = std::make_shared<evaluation::AutoencoderLink>(m.cnn, "cnn");
    m.classical = std::make_shared<evaluation::ClassicalLink>();

    const double budget = channel::perturbation_power({kPsrDb}, channel::block_signal_power(7));
    const double sigma2 = channel::noise_variance(kCraftEbNoDb, 4, 7);
    Rng rng(derive_seed(kMlpSeed, {99}));
    const auto universal = attacks::craft_universal(*m.mlp, budget, sigma2, {}, rng);
    attacks::AttackConfig si_cfg;
    si_cfg.seed = derive_seed(kMlpSeed, {0x5171});
    attacks::ShiftInvariantDetails details;
    const auto shift_invariant = attacks::craft_shift_invariant(*m.mlp, budget, sigma2, si_cfg, &details);
    std::cout << "  universal perturbation power " << fmt("%.4f", squared_norm(universal.vector.values()))
              << " of " << fmt("%.4f", budget) << "; shift-invariant sign BLERs +"
              << fmt("%.4f", details.bler_plus) << " / -" << fmt("%.4f", details.bler_minus)
              << std::endl;

    std::cout << "criterion 1: training parity" << std::endl;
    verdicts.push_back(criterion_parity(m));
    report(verdicts.back());

    std::cout << "criterion 2: adversarial vs jamming on the MLP" << std::endl;
    verdicts.push_back(criterion_adv_vs_jam(m, universal.vector));
    report(verdicts.back());

    std::cout << "criterion 3: degradation at 10 dB" << std::endl;
    verdicts.push_back(criterion_degradation(m, universal.vector));
    report(verdicts.back());

    std::cout << "criterion 4: shifted black-box transfer" << std::endl;
    TransferCurves cnn;
    verdicts.push_back(criterion_transfer(m, shift_invariant.vector, cnn));
    report(verdicts.back());

    std::cout << "criterion 5: classical robustness" << std::endl;
    verdicts.push_back(criterion_classical(m, shift_invariant.vector, cnn));
    report(verdicts.back());

    std::ofstream csv(std::filesystem::path(out_dir) / "acceptance_curves.csv");
    evaluation::write_csv_header(csv);
    for (const auto& c : g_curves) evaluation::write_csv_rows(csv, c);
  } catch (const std::exception& e) {
    std::cout << "acceptance run aborted: " << e.what() << std::endl;
    return 1;
  }

  std::sort(verdicts.begin(), verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.number < b.number; });
  std::cout << "\nsummary (" << fmt("%.0f", seconds_since(t0)) << " s)\n";
  bool all = true;
  for (const auto& v : verdicts) {
    report(v);
    all = all && v.pass;
  }
  return strict && !all ? 2 : 0;
}
