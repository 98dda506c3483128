#include "aeattack/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aeattack/errors.hpp"

namespace aeattack::io {

using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) { return {{"shape", t.shape()}, {"data", t.storage()}}; }

Tensor tensor_from_json(const json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                j.at("data").get<std::vector<double>>());
}

json layer_to_json(const nn::LayerSpec& l, std::string_view block) {
  return {{"block", block},
          {"kind", nn::to_string(l.kind)},
          {"activation", nn::to_string(l.activation)},
          {"input_dim", l.input_dim},
          {"output_dim", l.output_dim},
          {"in_channels", l.in_channels},
          {"height", l.height},
          {"width", l.width},
          {"filter_count", l.filter_count},
          {"kernel_h", l.kernel_h},
          {"kernel_w", l.kernel_w},
          {"stride", l.stride},
          {"padding", "same"}};
}

nn::LayerSpec layer_from_json(const json& j) {
  nn::LayerSpec l;
  l.kind = nn::parse_layer_kind(j.at("kind").get<std::string>());
  l.activation = nn::parse_activation(j.at("activation").get<std::string>());
  l.input_dim = j.at("input_dim").get<std::size_t>();
  l.output_dim = j.at("output_dim").get<std::size_t>();
  l.in_channels = j.value("in_channels", std::size_t{0});
  l.height = j.value("height", std::size_t{1});
  l.width = j.value("width", std::size_t{0});
  l.filter_count = j.value("filter_count", std::size_t{0});
  l.kernel_h = j.value("kernel_h", std::size_t{1});
  l.kernel_w = j.value("kernel_w", std::size_t{0});
  l.stride = j.value("stride", std::size_t{1});
  if (j.value("padding", std::string("same")) != "same") {
    throw ConfigError("only 'same' padding is supported");
  }
  return l;
}

template <typename Fn>
auto with_schema_errors(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string model_to_json(const autoencoder::TrainedAutoencoder& model) {
  json layers = json::array();
  json params = json::object();
  std::size_t index = 0;
  auto emit = [&](const std::vector<nn::LayerSpec>& specs, const nn::NetworkParams& ps,
                  std::string_view block) {
    for (std::size_t i = 0; i < specs.size(); ++i, ++index) {
      layers.push_back(layer_to_json(specs[i], block));
      if (specs[i].has_params()) {
        params[std::to_string(index)] = {{"weights", tensor_to_json(ps[i].weights)},
                                         {"biases", tensor_to_json(ps[i].biases)}};
      }
    }
  };
  emit(model.arch.encoder, model.encoder_params, "encoder");
  emit(model.arch.decoder, model.decoder_params, "decoder");

  const auto& c = model.config;
  json doc = {{"format_version", kModelFormatVersion},
              {"arch_name", autoencoder::to_string(model.arch.name)},
              {"k", model.arch.k},
              {"n", model.arch.n},
              {"layers", std::move(layers)},
              {"params", std::move(params)},
              {"training_meta",
               {{"seed", c.seed},
                {"epochs", c.epochs},
                {"train_ebno_db", c.train_ebno_db},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"final_loss", model.final_loss},
                {"loss_block", model.loss_block},
                {"loss_history", model.loss_history}}}};
  return doc.dump(1) + "\n";
}

autoencoder::TrainedAutoencoder model_from_json(std::string_view text) {
  return with_schema_errors("model file", [&] {
    const json doc = json::parse(text);
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw ConfigError("model file: unsupported format_version");
    }
    autoencoder::TrainedAutoencoder model;
    model.arch.name = autoencoder::parse_arch_name(doc.at("arch_name").get<std::string>());
    model.arch.k = doc.at("k").get<unsigned>();
    model.arch.n = doc.at("n").get<unsigned>();
    const json& params = doc.at("params");
    std::size_t index = 0;
    for (const json& lj : doc.at("layers")) {
      const std::string block = lj.at("block").get<std::string>();
      nn::LayerSpec spec = layer_from_json(lj);
      nn::LayerParams lp;
      if (spec.has_params()) {
        const json& pj = params.at(std::to_string(index));
        lp.weights = tensor_from_json(pj.at("weights"));
        lp.biases = tensor_from_json(pj.at("biases"));
      }
      if (block == "encoder") {
        model.arch.encoder.push_back(spec);
        model.encoder_params.push_back(std::move(lp));
      } else if (block == "decoder") {
        model.arch.decoder.push_back(spec);
        model.decoder_params.push_back(std::move(lp));
      } else {
        throw ConfigError("model file: layer " + std::to_string(index) + " has unknown block '" +
                          block + "'");
      }
      ++index;
    }
    nn::validate_network(model.arch.encoder, model.encoder_params);
    nn::validate_network(model.arch.decoder, model.decoder_params);
    if (model.arch.encoder.front().input_dim != model.arch.messages() ||
        model.arch.decoder.back().output_dim != model.arch.messages() ||
        model.arch.encoder.back().output_dim != model.arch.signal_length()) {
      throw ConfigError("model file: layer dims disagree with (k, n)");
    }
    const json& meta = doc.at("training_meta");
    model.config.seed = meta.at("seed").get<std::uint64_t>();
    model.config.epochs = meta.at("epochs").get<std::size_t>();
    model.config.train_ebno_db = meta.at("train_ebno_db").get<double>();
    model.config.batch_size = meta.value("batch_size", model.config.batch_size);
    model.config.learning_rate = meta.value("learning_rate", model.config.learning_rate);
    model.final_loss = meta.value("final_loss", 0.0);
    model.loss_block = meta.value("loss_block", model.loss_block);
    model.loss_history = meta.value("loss_history", std::vector<double>{});
    return model;
  });
}

std::string perturbation_to_json(const attacks::Perturbation& p) {
  json doc = {{"format_version", kPerturbationFormatVersion},
              {"vector", p.vector.storage()},
              {"p_power", p.p_power},
              {"no_update_warning", p.no_update_warning},
              {"provenance",
               {{"attack_kind", p.provenance.attack_kind},
                {"substitute_model_id", p.provenance.substitute_model_id},
                {"seed", p.provenance.seed},
                {"parameters", p.provenance.parameters}}}};
  return doc.dump(1) + "\n";
}

attacks::Perturbation perturbation_from_json(std::string_view text) {
  return with_schema_errors("perturbation file", [&] {
    const json doc = json::parse(text);
    if (doc.at("format_version").get<int>() != kPerturbationFormatVersion) {
      throw ConfigError("perturbation file: unsupported format_version");
    }
    attacks::Perturbation p;
    p.vector = Tensor::vector(doc.at("vector").get<std::vector<double>>());
    p.p_power = doc.at("p_power").get<double>();
    p.no_update_warning = doc.value("no_update_warning", false);
    const json& prov = doc.at("provenance");
    p.provenance.attack_kind = prov.at("attack_kind").get<std::string>();
    p.provenance.substitute_model_id = prov.value("substitute_model_id", std::string{});
    p.provenance.seed = prov.value("seed", std::uint64_t{0});
    p.provenance.parameters =
        prov.value("parameters", std::map<std::string, double>{});
    if (squared_norm(p.vector.values()) > p.p_power + 1e-9) {
      throw ConfigError("perturbation file: vector exceeds its power budget");
    }
    return p;
  });
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void save_model(const autoencoder::TrainedAutoencoder& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

autoencoder::TrainedAutoencoder load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

void save_perturbation(const attacks::Perturbation& p, const std::filesystem::path& path) {
  write_text_file(path, perturbation_to_json(p));
}

attacks::Perturbation load_perturbation(const std::filesystem::path& path) {
  return perturbation_from_json(read_text_file(path));
}

}  // namespace aeattack::io
