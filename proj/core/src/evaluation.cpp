#include "aeattack/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "aeattack/classical.hpp"
#include "aeattack/errors.hpp"
#include "aeattack/rng.hpp"

namespace aeattack::evaluation {

AutoencoderLink::AutoencoderLink(std::shared_ptr<const autoencoder::TrainedAutoencoder> model,
                                 std::string name)
    : model_(std::move(model)), name_(std::move(name)) {
  if (!model_) throw ConfigError("AutoencoderLink: null model");
  codebook_ = autoencoder::codebook(*model_);
}

const Tensor& AutoencoderLink::transmit(std::size_t message) const {
  if (message >= codebook_.size()) throw ArgumentError("transmit: message out of range");
  return codebook_[message];
}

std::size_t AutoencoderLink::receive(const Tensor& y) const {
  return autoencoder::decode(*model_, y).message;
}

const Tensor& ClassicalLink::transmit(std::size_t message) const {
  if (message >= classical::kMessages) throw ArgumentError("transmit: message out of range");
  return classical::ModulatedCodebook::instance().signals[message];
}

std::size_t ClassicalLink::receive(const Tensor& y) const { return classical::mld_decode(y); }

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Jamming: return "jamming";
    case AttackKind::Perturbation: return "perturbation";
  }
  return "?";
}

std::string_view to_string(ShiftPolicy policy) {
  return policy == ShiftPolicy::None ? "none" : "uniform_cyclic";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (auto k : {AttackKind::None, AttackKind::Jamming, AttackKind::Perturbation}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown attack '" + std::string(name) +
                    "' (expected none, jamming or perturbation)");
}

ShiftPolicy parse_shift_policy(std::string_view name) {
  for (auto p : {ShiftPolicy::None, ShiftPolicy::UniformCyclic}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown shift policy '" + std::string(name) +
                    "' (expected none or uniform_cyclic)");
}

void Scenario::validate() const {
  const std::string who = "scenario '" + id + "': ";
  if (!system) throw ConfigError(who + "no system");
  if (trials < 1) throw ConfigError(who + "trials must be >= 1");
  if (channel.k != system->k() || channel.n != system->n()) {
    throw ConfigError(who + "channel (k, n) disagrees with the system");
  }
  if (!(channel.sigma2 >= 0.0)) throw ConfigError(who + "negative noise variance");
  if (attack == AttackKind::Perturbation && perturbation.size() != system->signal_length()) {
    throw ConfigError(who + "perturbation length " + std::to_string(perturbation.size()) +
                      " does not match signal length " +
                      std::to_string(system->signal_length()));
  }
  if (attack == AttackKind::Jamming && !psr_db) throw ConfigError(who + "jamming needs a PSR");
  if (shift == ShiftPolicy::UniformCyclic && attack != AttackKind::Perturbation) {
    throw ConfigError(who + "shift policy only applies to a fixed perturbation");
  }
}

TrialRecord trace_trial(const Scenario& sc, std::uint64_t trial_index) {
  const LinkSystem& sys = *sc.system;
  const std::size_t L = sys.signal_length();
  Rng rng = derive_rng(sc.seed, {sc.grid_index, trial_index});

  // Draw order is fixed: message, noise, then attack-specific randomness, so the
  // message and noise of a trial never depend on the attack.
  TrialRecord rec;
  rec.message = std::uniform_int_distribution<std::size_t>(0, sys.messages() - 1)(rng);
  rec.noise = channel::awgn(L, sc.channel.sigma2, rng);
  switch (sc.attack) {
    case AttackKind::None:
      rec.attack = Tensor::zeros(L);
      break;
    case AttackKind::Jamming: {
      const double power = channel::perturbation_power(
          channel::Psr{*sc.psr_db}, channel::block_signal_power(sys.n()));
      rec.attack = channel::gaussian_jamming(L, power, rng);
      break;
    }
    case AttackKind::Perturbation:
      if (sc.shift == ShiftPolicy::UniformCyclic) {
        rec.shift = std::uniform_int_distribution<std::size_t>(0, sys.n() - 1)(rng);
        rec.attack = channel::cyclic_shift(sc.perturbation, rec.shift);
      } else {
        rec.attack = Tensor::vector(sc.perturbation.storage());
      }
      break;
  }
  const Tensor y = channel::apply_channel(sys.transmit(rec.message), rec.attack, rec.noise);
  rec.decided = sys.receive(y);
  return rec;
}

TrialResult run_trial(const Scenario& sc, std::uint64_t trial_index) {
  return trace_trial(sc, trial_index).error() ? TrialResult::Error : TrialResult::Correct;
}

double BlerPoint::lower() const noexcept { return std::max(0.0, bler - ci95); }

double BlerPoint::upper() const noexcept {
  if (errors == 0 && trials > 0) return 3.0 / static_cast<double>(trials);
  return std::min(1.0, bler + ci95);
}

double ci_halfwidth(double bler, std::size_t trials) {
  if (trials == 0) return 0.0;
  return 1.96 * std::sqrt(bler * (1.0 - bler) / static_cast<double>(trials));
}

BlerPoint make_point(double ebno_db, std::size_t errors, std::size_t trials) {
  BlerPoint p;
  p.ebno_db = ebno_db;
  p.trials = trials;
  p.errors = errors;
  p.bler = trials == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(trials);
  p.ci95 = ci_halfwidth(p.bler, trials);
  return p;
}

BlerPoint estimate_bler(const Scenario& sc, EvalOptions options) {
  sc.validate();
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (sc.trials + kChunk - 1) / kChunk;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> errors{0};
  auto worker = [&] {
    std::size_t local = 0;
    for (std::size_t c = next++; c < chunks; c = next++) {
      const std::size_t end = std::min(sc.trials, (c + 1) * kChunk);
      for (std::size_t t = c * kChunk; t < end; ++t) {
        if (run_trial(sc, t) == TrialResult::Error) ++local;
      }
    }
    errors += local;
  };
  const unsigned threads = std::max(1U, std::min<unsigned>(options.threads,
                                                           static_cast<unsigned>(chunks)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return make_point(sc.channel.ebno_db, errors.load(), sc.trials);
}

BlerCurve sweep(const Scenario& tmpl, std::span<const double> ebno_grid, EvalOptions options) {
  if (ebno_grid.empty()) throw ConfigError("sweep: empty Eb/N0 grid");
  for (std::size_t i = 1; i < ebno_grid.size(); ++i) {
    if (!(ebno_grid[i] > ebno_grid[i - 1])) {
      throw ConfigError("sweep: Eb/N0 grid must be strictly increasing");
    }
  }
  BlerCurve curve;
  curve.scenario_id = tmpl.id;
  curve.system = tmpl.system ? tmpl.system->name() : "";
  curve.attack = std::string(to_string(tmpl.attack));
  curve.shift_policy = std::string(to_string(tmpl.shift));
  curve.psr_db = tmpl.psr_db;
  curve.seed = tmpl.seed;
  for (std::size_t i = 0; i < ebno_grid.size(); ++i) {
    Scenario sc = tmpl;
    sc.grid_index = i;
    sc.channel = channel::ChannelConfig::make(ebno_grid[i], tmpl.channel.k, tmpl.channel.n);
    curve.points.push_back(estimate_bler(sc, options));
  }
  return curve;
}

std::vector<double> ebno_range(double first, double last, double step) {
  if (!(step > 0.0)) throw ConfigError("ebno_range: step must be positive");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((last - first) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) grid.push_back(first + static_cast<double>(i) * step);
  return grid;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

const char* kCsvHeader =
    "scenario_id,system,attack,shift_policy,psr_db,ebno_db,trials,errors,bler,ci95,seed,note";

}  // namespace

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_rows(std::ostream& out, const BlerCurve& curve) {
  for (const auto& p : curve.points) {
    out << curve.scenario_id << ',' << curve.system << ',' << curve.attack << ','
        << curve.shift_policy << ',' << (curve.psr_db ? format_double(*curve.psr_db) : "") << ','
        << format_double(p.ebno_db) << ',' << p.trials << ',' << p.errors << ','
        << format_double(p.bler) << ',' << format_double(p.ci95) << ',' << curve.seed << ',';
    if (p.errors == 0) out << "zero_errors_upper95=" << format_double(p.upper());
    out << '\n';
  }
}

std::vector<BlerCurve> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("results CSV is empty");
  if (line != kCsvHeader) throw ConfigError("results CSV has an unexpected header: " + line);
  std::vector<BlerCurve> curves;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 12) {
      throw ConfigError("results CSV line " + std::to_string(line_no) + ": expected 12 fields");
    }
    try {
      auto [it, inserted] = index.try_emplace(f[0], curves.size());
      if (inserted) {
        BlerCurve c;
        c.scenario_id = f[0];
        c.system = f[1];
        c.attack = f[2];
        c.shift_policy = f[3];
        if (!f[4].empty()) c.psr_db = std::stod(f[4]);
        c.seed = std::stoull(f[10]);
        curves.push_back(std::move(c));
      }
      BlerPoint p;
      p.ebno_db = std::stod(f[5]);
      p.trials = std::stoull(f[6]);
      p.errors = std::stoull(f[7]);
      p.bler = std::stod(f[8]);
      p.ci95 = std::stod(f[9]);
      curves[it->second].points.push_back(p);
    } catch (const std::logic_error&) {
      throw ConfigError("results CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return curves;
}

std::string_view to_string(Dominance d) {
  switch (d) {
    case Dominance::Greater: return ">";
    case Dominance::Less: return "<";
    case Dominance::Indistinct: return "~";
  }
  return "?";
}

Dominance dominance(const BlerPoint& a, const BlerPoint& b) {
  if (a.lower() > b.upper()) return Dominance::Greater;
  if (b.lower() > a.upper()) return Dominance::Less;
  return Dominance::Indistinct;
}

Comparison compare(const BlerCurve& a, const BlerCurve& b) {
  if (a.points.size() != b.points.size()) {
    throw ConfigError("compare: curves '" + a.scenario_id + "' and '" + b.scenario_id +
                      "' have different grids");
  }
  Comparison cmp{a.scenario_id, b.scenario_id, {}};
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const BlerPoint& pa = a.points[i];
    const BlerPoint& pb = b.points[i];
    if (pa.ebno_db != pb.ebno_db) {
      throw ConfigError("compare: curves '" + a.scenario_id + "' and '" + b.scenario_id +
                        "' have different grids");
    }
    ComparisonRow row;
    row.ebno_db = pa.ebno_db;
    row.bler_a = pa.bler;
    row.bler_b = pb.bler;
    if (pb.bler > 0.0) {
      row.ratio = pa.bler / pb.bler;
    } else {
      row.ratio = pa.bler > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    row.verdict = (a.scenario_id == b.scenario_id) ? Dominance::Indistinct : dominance(pa, pb);
    cmp.rows.push_back(row);
  }
  return cmp;
}

ComparisonReport compare_report(std::span<const BlerCurve> curves,
                                std::span<const std::pair<std::string, std::string>> pairs) {
  auto find = [&](const std::string& id) -> const BlerCurve& {
    for (const auto& c : curves) {
      if (c.scenario_id == id) return c;
    }
    std::string available;
    for (const auto& c : curves) available += (available.empty() ? "" : ", ") + c.scenario_id;
    throw ConfigError("unknown scenario id '" + id + "'; available: " + available);
  };
  ComparisonReport report;
  for (const auto& [a, b] : pairs) report.comparisons.push_back(compare(find(a), find(b)));
  return report;
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  char buf[160];
  for (const auto& c : comparisons) {
    out << c.a << " vs " << c.b << '\n';
    out << "  ebno_db        bler_a        bler_b         ratio  verdict\n";
    for (const auto& r : c.rows) {
      std::snprintf(buf, sizeof buf, "  %7.2f  %12.4e  %12.4e  %12.4g  %s\n", r.ebno_db, r.bler_a,
                    r.bler_b, r.ratio, std::string(to_string(r.verdict)).c_str());
      out << buf;
    }
  }
  return out.str();
}

std::string ComparisonReport::to_json() const {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : comparisons) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : c.rows) {
      nlohmann::json row = {{"ebno_db", r.ebno_db},
                            {"bler_a", r.bler_a},
                            {"bler_b", r.bler_b},
                            {"verdict", std::string(to_string(r.verdict))}};
      // JSON has no infinity; a null ratio means bler_b == 0 < bler_a.
      row["ratio"] = std::isfinite(r.ratio) ? nlohmann::json(r.ratio) : nlohmann::json(nullptr);
      rows.push_back(std::move(row));
    }
    doc.push_back({{"a", c.a}, {"b", c.b}, {"rows", std::move(rows)}});
  }
  return doc.dump(2);
}

}  // namespace aeattack::evaluation
