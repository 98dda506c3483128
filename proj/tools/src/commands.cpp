#include "aeattack/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "aeattack/cli/experiment.hpp"
#include "aeattack/errors.hpp"
#include "aeattack/io.hpp"

namespace aeattack::cli {

namespace {

struct TrainArgs {
  std::string arch = "mlp";
  unsigned k = 4;
  unsigned n = 7;
  autoencoder::TrainConfig config;
  std::string out;
};

struct CraftArgs {
  std::string model;
  std::string kind;
  CraftSpec spec;
  std::string out;
};

struct EvaluateArgs {
  std::string config;
  std::string out;
  std::string dump_config;
  unsigned threads = 1;
};

struct CompareArgs {
  std::string in;
  std::string pairs;
  std::string json;
};

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainSpec spec;
  spec.arch = autoencoder::parse_arch_name(a.arch);
  spec.k = a.k;
  spec.n = a.n;
  spec.config = a.config;
  spec.config.validate();
  const auto model = train_model(spec);
  io::save_model(model, a.out);
  out << "final_loss " << format("%.6g", model.final_loss) << "\n";
  out << "clean_accuracy " << format("%.4f", autoencoder::clean_accuracy(model)) << "\n";
}

void cmd_craft(CraftArgs a, std::ostream& out) {
  const auto model = io::load_model(a.model);
  a.spec.kind = parse_craft_kind(a.kind);
  a.spec.model = std::filesystem::path(a.model).stem().string();
  const auto p = craft_perturbation(model, a.spec);
  io::save_perturbation(p, a.out);
  out << "power " << format("%.6g", squared_norm(p.vector.values())) << " budget "
      << format("%.6g", p.p_power) << "\n";
  if (p.no_update_warning) out << "warning: no crafting iteration saw a correct decision\n";
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto config = ExperimentConfig::load(a.config);
  if (!a.dump_config.empty()) io::write_text_file(a.dump_config, config.dump());
  if (a.out.empty()) return;
  const auto curves = run_experiment(config, {a.threads}, &err);
  std::ostringstream csv;
  evaluation::write_csv_header(csv);
  std::size_t rows = 0;
  for (const auto& c : curves) {
    evaluation::write_csv_rows(csv, c);
    rows += c.points.size();
  }
  io::write_text_file(a.out, csv.str());
  out << "wrote " << rows << " rows to " << a.out << "\n";
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
      throw ConfigError("--pairs: expected a:b entries separated by commas, got '" + item + "'");
    }
    pairs.emplace_back(item.substr(0, colon), item.substr(colon + 1));
  }
  if (pairs.empty()) throw ConfigError("--pairs: no pairs given");
  return pairs;
}

void cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::istringstream in(io::read_text_file(a.in));
  const auto curves = evaluation::read_csv(in);
  const auto pairs = parse_pairs(a.pairs);
  const auto report = evaluation::compare_report(curves, pairs);
  out << report.to_text();
  if (!a.json.empty()) io::write_text_file(a.json, report.to_json());
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autoencoder adversarial-robustness toolkit", "aeattack"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train an autoencoder and write its model JSON");
  t->add_option("--arch", train.arch, "mlp or cnn")->capture_default_str();
  t->add_option("--k", train.k, "Bits per message")->capture_default_str();
  t->add_option("--n", train.n, "Complex channel uses per block")->capture_default_str();
  t->add_option("--epochs", train.config.epochs, "Optimizer steps")->capture_default_str();
  t->add_option("--batch", train.config.batch_size, "Batch size")->capture_default_str();
  t->add_option("--lr", train.config.learning_rate, "Adam learning rate")->capture_default_str();
  t->add_option("--train-ebno-db", train.config.train_ebno_db, "Training Eb/N0 in dB")
      ->capture_default_str();
  t->add_option("--seed", train.config.seed, "RNG seed")->required();
  t->add_option("--out", train.out, "Model JSON path")->required();

  CraftArgs craft;
  auto* c = app.add_subcommand("craft", "Craft a perturbation against a substitute model");
  c->add_option("--model", craft.model, "Substitute model JSON")->required();
  c->add_option("--kind", craft.kind, "universal or shift-invariant")->required();
  c->add_option("--psr-db", craft.spec.psr_db, "Perturbation-to-signal ratio in dB")
      ->capture_default_str();
  c->add_option("--ebno-db", craft.spec.ebno_db, "Crafting Eb/N0 in dB")->capture_default_str();
  c->add_option("--seed", craft.spec.config.seed, "RNG seed")->required();
  c->add_option("--out", craft.out, "Perturbation JSON path")->required();
  c->add_option("--samples", craft.spec.config.number_of_samples, "Iterations per universal perturbation")
      ->capture_default_str();
  c->add_option("--pool", craft.spec.config.pool_size, "Candidate pool size (shift-invariant)")
      ->capture_default_str();
  c->add_option("--keep", craft.spec.config.keep_count, "Candidates kept for the SVD")
      ->capture_default_str();
  c->add_option("--screening-trials", craft.spec.config.screening_trials,
                "Monte Carlo trials per candidate")
      ->capture_default_str();
  c->add_flag("--keep-lowest-bler", craft.spec.config.keep_lowest_bler,
              "Keep the lowest-BLER candidates instead of the highest");

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Run every scenario of an experiment config");
  e->add_option("--config", evaluate.config, "Experiment JSON")->required();
  e->add_option("--out", evaluate.out, "Results CSV path");
  e->add_option("--threads", evaluate.threads, "Worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  e->add_option("--dump-config", evaluate.dump_config, "Write the normalized config here");

  CompareArgs compare;
  auto* m = app.add_subcommand("compare", "BLER ratios and dominance verdicts between curves");
  m->add_option("--in", compare.in, "Results CSV")->required();
  m->add_option("--pairs", compare.pairs, "Comma-separated a:b scenario id pairs")->required();
  m->add_option("--json", compare.json, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (t->parsed()) {
      cmd_train(train, out);
    } else if (c->parsed()) {
      cmd_craft(craft, out);
    } else if (e->parsed()) {
      if (evaluate.out.empty() && evaluate.dump_config.empty()) {
        throw ConfigError("evaluate: give --out, --dump-config or both");
      }
      cmd_evaluate(evaluate, out, err);
    } else if (m->parsed()) {
      cmd_compare(compare, out);
    }
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const NumericError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const ArgumentError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  } catch (const DegenerateInputError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace aeattack::cli
