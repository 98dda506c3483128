#include "aeattack/cli/experiment.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <set>

#include <json.hpp>

#include "aeattack/channel.hpp"
#include "aeattack/errors.hpp"
#include "aeattack/io.hpp"

namespace aeattack::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(CraftKind kind) {
  return kind == CraftKind::Universal ? "universal" : "shift-invariant";
}

CraftKind parse_craft_kind(std::string_view name) {
  if (name == "universal") return CraftKind::Universal;
  if (name == "shift-invariant") return CraftKind::ShiftInvariant;
  throw ConfigError("unknown perturbation kind '" + std::string(name) +
                    "' (expected universal or shift-invariant)");
}

namespace {

// A JSON value together with its path from the document root.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(std::string_view message) const {
    throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " +
                      std::string(message));
  }

  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<std::string_view> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) child_path_fail(key, "unknown field");
    }
  }

  bool has(std::string_view key) const { return value_.contains(key); }

  Node at(std::string_view key) const {
    if (!value_.contains(key)) child_path_fail(std::string(key), "missing required field");
    return Node(value_.at(key), child(key));
  }

  std::vector<Node> items() const {
    if (!value_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_.size(); ++i) {
      out.emplace_back(value_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned()) fail("expected a non-negative integer");
    return value_.get<std::uint64_t>();
  }

  std::size_t positive() const {
    const auto v = unsigned_integer();
    if (v == 0) fail("must be >= 1");
    return static_cast<std::size_t>(v);
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  template <typename Fn>
  auto parsed(Fn&& fn) const {
    try {
      return fn(string());
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }

 private:
  std::string child(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }
  [[noreturn]] void child_path_fail(const std::string& key, std::string_view message) const {
    throw ConfigError(child(key) + ": " + std::string(message));
  }

  const json& value_;
  std::string path_;
};

TrainSpec parse_train(const Node& node) {
  node.expect_object({"arch", "k", "n", "epochs", "batch_size", "learning_rate", "train_ebno_db",
                      "seed"});
  TrainSpec spec;
  spec.arch = node.at("arch").parsed(
      [](const std::string& s) { return autoencoder::parse_arch_name(s); });
  if (node.has("k")) spec.k = static_cast<unsigned>(node.at("k").positive());
  if (node.has("n")) spec.n = static_cast<unsigned>(node.at("n").positive());
  auto& c = spec.config;
  if (node.has("epochs")) c.epochs = node.at("epochs").positive();
  if (node.has("batch_size")) c.batch_size = node.at("batch_size").positive();
  if (node.has("learning_rate")) c.learning_rate = node.at("learning_rate").number();
  if (node.has("train_ebno_db")) c.train_ebno_db = node.at("train_ebno_db").number();
  c.seed = node.at("seed").unsigned_integer();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    node.fail(e.what());
  }
  return spec;
}

CraftSpec parse_craft(const Node& node) {
  node.expect_object({"model", "kind", "psr_db", "ebno_db", "seed", "samples", "pool", "keep",
                      "screening_trials", "keep_lowest_bler"});
  CraftSpec spec;
  spec.model = node.at("model").string();
  spec.kind = node.at("kind").parsed([](const std::string& s) { return parse_craft_kind(s); });
  if (node.has("psr_db")) spec.psr_db = node.at("psr_db").number();
  if (node.has("ebno_db")) spec.ebno_db = node.at("ebno_db").number();
  auto& c = spec.config;
  c.seed = node.at("seed").unsigned_integer();
  if (node.has("samples")) c.number_of_samples = node.at("samples").positive();
  if (node.has("pool")) c.pool_size = node.at("pool").positive();
  if (node.has("keep")) c.keep_count = node.at("keep").positive();
  if (node.has("screening_trials")) c.screening_trials = node.at("screening_trials").positive();
  if (node.has("keep_lowest_bler")) c.keep_lowest_bler = node.at("keep_lowest_bler").boolean();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    node.fail(e.what());
  }
  return spec;
}

std::vector<double> parse_grid(const Node& node) {
  std::vector<double> grid;
  if (node.has("first") || node.has("last")) {
    node.expect_object({"first", "last", "step"});
    const double step = node.has("step") ? node.at("step").number() : 1.0;
    if (!(step > 0.0)) node.at("step").fail("must be positive");
    grid = evaluation::ebno_range(node.at("first").number(), node.at("last").number(), step);
  } else {
    for (const Node& item : node.items()) grid.push_back(item.number());
  }
  if (grid.empty()) node.fail("empty Eb/N0 grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) node.fail("Eb/N0 grid must be strictly increasing");
  }
  return grid;
}

template <typename Entry>
void check_unique(const std::vector<Entry>& entries, const char* section) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id.empty()) {
      throw ConfigError(std::string(section) + "[" + std::to_string(i) + "].id: must not be empty");
    }
    if (!seen.insert(entries[i].id).second) {
      throw ConfigError(std::string(section) + "[" + std::to_string(i) + "].id: duplicate id '" +
                        entries[i].id + "'");
    }
  }
}

ordered_json dump_train(const TrainSpec& s) {
  const auto& c = s.config;
  return {{"arch", autoencoder::to_string(s.arch)},
          {"k", s.k},
          {"n", s.n},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"train_ebno_db", c.train_ebno_db},
          {"seed", c.seed}};
}

ordered_json dump_craft(const CraftSpec& s) {
  const auto& c = s.config;
  return {{"model", s.model},
          {"kind", to_string(s.kind)},
          {"psr_db", s.psr_db},
          {"ebno_db", s.ebno_db},
          {"seed", c.seed},
          {"samples", c.number_of_samples},
          {"pool", c.pool_size},
          {"keep", c.keep_count},
          {"screening_trials", c.screening_trials},
          {"keep_lowest_bler", c.keep_lowest_bler}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text, std::filesystem::path base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  const Node root(doc, "");
  root.expect_object({"seed", "trials", "ebno_db", "models", "perturbations", "scenarios"});

  ExperimentConfig cfg;
  cfg.base_dir = std::move(base_dir);
  cfg.seed = root.at("seed").unsigned_integer();
  if (root.has("trials")) cfg.trials = root.at("trials").positive();
  cfg.ebno_db = parse_grid(root.at("ebno_db"));

  if (root.has("models")) {
    for (const Node& m : root.at("models").items()) {
      m.expect_object({"id", "path", "train"});
      ModelEntry e;
      e.id = m.at("id").string();
      if (m.has("path")) e.path = m.at("path").string();
      if (m.has("train")) e.train = parse_train(m.at("train"));
      if (e.path.has_value() == e.train.has_value()) m.fail("give exactly one of path or train");
      if (e.id == "classical") m.at("id").fail("'classical' is reserved for the baseline");
      cfg.models.push_back(std::move(e));
    }
  }
  check_unique(cfg.models, "models");

  if (root.has("perturbations")) {
    for (const Node& p : root.at("perturbations").items()) {
      p.expect_object({"id", "path", "craft"});
      PerturbationEntry e;
      e.id = p.at("id").string();
      if (p.has("path")) e.path = p.at("path").string();
      if (p.has("craft")) e.craft = parse_craft(p.at("craft"));
      if (e.path.has_value() == e.craft.has_value()) p.fail("give exactly one of path or craft");
      cfg.perturbations.push_back(std::move(e));
    }
  }
  check_unique(cfg.perturbations, "perturbations");

  auto model_known = [&](const std::string& id) {
    for (const auto& m : cfg.models) {
      if (m.id == id) return true;
    }
    return false;
  };
  auto perturbation_known = [&](const std::string& id) {
    for (const auto& p : cfg.perturbations) {
      if (p.id == id) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i < cfg.perturbations.size(); ++i) {
    const auto& e = cfg.perturbations[i];
    if (e.craft && !model_known(e.craft->model)) {
      throw ConfigError("perturbations[" + std::to_string(i) + "].craft.model: unknown model '" +
                        e.craft->model + "'");
    }
  }

  const Node scenarios = root.at("scenarios");
  for (const Node& s : scenarios.items()) {
    s.expect_object({"id", "system", "attack", "perturbation", "shift_policy", "psr_db", "trials",
                     "seed"});
    ScenarioEntry e;
    e.id = s.at("id").string();
    e.system = s.at("system").string();
    if (e.system != "classical" && !model_known(e.system)) {
      s.at("system").fail("unknown system '" + e.system + "'");
    }
    if (s.has("attack")) {
      e.attack = s.at("attack").parsed(
          [](const std::string& v) { return evaluation::parse_attack_kind(v); });
    }
    if (s.has("perturbation")) e.perturbation = s.at("perturbation").string();
    if (e.attack == evaluation::AttackKind::Perturbation) {
      if (e.perturbation.empty()) s.fail("attack 'perturbation' needs a perturbation id");
      if (!perturbation_known(e.perturbation)) {
        s.at("perturbation").fail("unknown perturbation '" + e.perturbation + "'");
      }
    } else if (!e.perturbation.empty()) {
      s.at("perturbation").fail("only meaningful with attack 'perturbation'");
    }
    if (s.has("shift_policy")) {
      e.shift = s.at("shift_policy").parsed(
          [](const std::string& v) { return evaluation::parse_shift_policy(v); });
    }
    if (e.shift != evaluation::ShiftPolicy::None &&
        e.attack != evaluation::AttackKind::Perturbation) {
      s.at("shift_policy").fail("only applies to attack 'perturbation'");
    }
    if (s.has("psr_db")) e.psr_db = s.at("psr_db").number();
    if (e.attack == evaluation::AttackKind::Jamming && !e.psr_db) {
      s.fail("attack 'jamming' needs psr_db");
    }
    if (s.has("trials")) e.trials = s.at("trials").positive();
    if (s.has("seed")) e.seed = s.at("seed").unsigned_integer();
    cfg.scenarios.push_back(std::move(e));
  }
  if (cfg.scenarios.empty()) scenarios.fail("empty scenario list");
  check_unique(cfg.scenarios, "scenarios");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return parse(io::read_text_file(path), path.parent_path());
}

std::string ExperimentConfig::dump() const {
  ordered_json doc;
  doc["seed"] = seed;
  doc["trials"] = trials;
  doc["ebno_db"] = ebno_db;
  ordered_json models_j = ordered_json::array();
  for (const auto& m : models) {
    ordered_json e = {{"id", m.id}};
    if (m.path) e["path"] = *m.path;
    if (m.train) e["train"] = dump_train(*m.train);
    models_j.push_back(std::move(e));
  }
  doc["models"] = std::move(models_j);
  ordered_json perts_j = ordered_json::array();
  for (const auto& p : perturbations) {
    ordered_json e = {{"id", p.id}};
    if (p.path) e["path"] = *p.path;
    if (p.craft) e["craft"] = dump_craft(*p.craft);
    perts_j.push_back(std::move(e));
  }
  doc["perturbations"] = std::move(perts_j);
  ordered_json scen_j = ordered_json::array();
  for (const auto& s : scenarios) {
    ordered_json e = {{"id", s.id},
                      {"system", s.system},
                      {"attack", evaluation::to_string(s.attack)}};
    if (!s.perturbation.empty()) e["perturbation"] = s.perturbation;
    e["shift_policy"] = evaluation::to_string(s.shift);
    if (s.psr_db) e["psr_db"] = *s.psr_db;
    if (s.trials) e["trials"] = *s.trials;
    if (s.seed) e["seed"] = *s.seed;
    scen_j.push_back(std::move(e));
  }
  doc["scenarios"] = std::move(scen_j);
  return doc.dump(2) + "\n";
}

autoencoder::TrainedAutoencoder train_model(const TrainSpec& spec) {
  const auto arch = spec.arch == autoencoder::ArchName::MLP
                        ? autoencoder::build_mlp(spec.k, spec.n)
                        : autoencoder::build_cnn(spec.k, spec.n);
  return autoencoder::train(arch, spec.config);
}

attacks::Perturbation craft_perturbation(const autoencoder::TrainedAutoencoder& substitute,
                                         const CraftSpec& spec) {
  const unsigned k = substitute.arch.k, n = substitute.arch.n;
  const double p_power =
      channel::perturbation_power({spec.psr_db}, channel::block_signal_power(n));
  const double sigma2 = channel::noise_variance(spec.ebno_db, k, n);
  attacks::Perturbation p;
  if (spec.kind == CraftKind::Universal) {
    Rng rng = derive_rng(spec.config.seed, {0});
    p = attacks::craft_universal(substitute, p_power, sigma2, spec.config, rng);
  } else {
    p = attacks::craft_shift_invariant(substitute, p_power, sigma2, spec.config);
  }
  p.provenance.seed = spec.config.seed;
  p.provenance.substitute_model_id = spec.model;
  p.provenance.parameters["psr_db"] = spec.psr_db;
  p.provenance.parameters["ebno_db"] = spec.ebno_db;
  return p;
}

std::vector<evaluation::BlerCurve> run_experiment(const ExperimentConfig& config,
                                                  evaluation::EvalOptions options,
                                                  std::ostream* log) {
  std::map<std::string, std::shared_ptr<const autoencoder::TrainedAutoencoder>> models;
  for (const auto& m : config.models) {
    if (m.path) {
      models[m.id] = std::make_shared<const autoencoder::TrainedAutoencoder>(
          io::load_model(resolve(config.base_dir, *m.path)));
    } else {
      if (log) *log << "training model '" << m.id << "'\n";
      models[m.id] = std::make_shared<const autoencoder::TrainedAutoencoder>(train_model(*m.train));
    }
  }
  std::map<std::string, attacks::Perturbation> perturbations;
  for (const auto& p : config.perturbations) {
    if (p.path) {
      perturbations[p.id] = io::load_perturbation(resolve(config.base_dir, *p.path));
    } else {
      if (log) *log << "crafting perturbation '" << p.id << "'\n";
      perturbations[p.id] = craft_perturbation(*models.at(p.craft->model), *p.craft);
    }
  }

  std::map<std::string, std::shared_ptr<const evaluation::LinkSystem>> links;
  links["classical"] = std::make_shared<const evaluation::ClassicalLink>();
  for (const auto& [id, model] : models) {
    links[id] = std::make_shared<const evaluation::AutoencoderLink>(model, id);
  }

  std::vector<evaluation::BlerCurve> curves;
  for (std::size_t i = 0; i < config.scenarios.size(); ++i) {
    const auto& e = config.scenarios[i];
    const std::string where = "scenarios[" + std::to_string(i) + "]";
    evaluation::Scenario sc;
    sc.id = e.id;
    sc.system = links.at(e.system);
    sc.attack = e.attack;
    sc.shift = e.shift;
    sc.psr_db = e.psr_db;
    sc.trials = e.trials.value_or(config.trials);
    sc.seed = e.seed.value_or(config.seed);
    sc.channel = channel::ChannelConfig::make(config.ebno_db.front(), sc.system->k(),
                                              sc.system->n());
    if (e.attack == evaluation::AttackKind::Perturbation) {
      const auto& p = perturbations.at(e.perturbation);
      if (p.vector.size() != sc.system->signal_length()) {
        throw ConfigError(where + ": perturbation '" + e.perturbation + "' has length " +
                          std::to_string(p.vector.size()) + " but system '" + e.system +
                          "' expects " + std::to_string(sc.system->signal_length()));
      }
      sc.perturbation = p.vector;
      if (!sc.psr_db) {
        sc.psr_db = 10.0 * std::log10(p.p_power / channel::block_signal_power(sc.system->n()));
      }
    }
    if (log) *log << "sweeping '" << e.id << "' over " << config.ebno_db.size() << " points\n";
    try {
      curves.push_back(evaluation::sweep(sc, config.ebno_db, options));
    } catch (const ConfigError& err) {
      throw ConfigError(where + ": " + err.what());
    }
  }
  return curves;
}

}  // namespace aeattack::cli
