#include "experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "orthoprobe/errors.hpp"

namespace ortho::cli {

namespace {

using nlohmann::json;

void require_keys(const json& object, const char* where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read_field(const json& object, const char* key, T& out) {
  if (!object.contains(key)) return;
  try {
    object.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + ": wrong type in config");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_treebank_paths(const json& root, ExperimentConfig& config) {
  if (!root.contains("treebank")) return;
  const json& tb = root.at("treebank");
  if (!tb.is_object()) throw ConfigError("treebank: expected an object");
  require_keys(tb, "treebank", {"train", "dev", "test"});
  std::string train, dev, test;
  read_field(tb, "train", train);
  read_field(tb, "dev", dev);
  read_field(tb, "test", test);
  if (!train.empty()) config.train_conllu = resolve(config.config_dir, train);
  if (!dev.empty()) config.dev_conllu = resolve(config.config_dir, dev);
  if (!test.empty()) config.test_conllu = resolve(config.config_dir, test);
}

void read_synth_spec(const json& root, ExperimentConfig& config) {
  if (!root.contains("synth")) return;
  const json& sy = root.at("synth");
  if (!sy.is_object()) throw ConfigError("synth: expected an object");
  require_keys(sy, "synth",
               {"train_sentences", "dev_sentences", "test_sentences", "min_length", "max_length",
                "ambient_dim", "structures", "noise_scale", "rotation_seed"});
  SynthSpec& spec = config.synth;
  read_field(sy, "train_sentences", spec.train_sentences);
  read_field(sy, "dev_sentences", spec.dev_sentences);
  read_field(sy, "test_sentences", spec.test_sentences);
  read_field(sy, "min_length", spec.min_length);
  read_field(sy, "max_length", spec.max_length);
  read_field(sy, "ambient_dim", spec.ambient_dim);
  read_field(sy, "noise_scale", spec.noise_scale);
  read_field(sy, "rotation_seed", spec.rotation_seed);
  if (sy.contains("structures")) {
    std::vector<std::string> names;
    read_field(sy, "structures", names);
    spec.structures.clear();
    for (const auto& name : names) spec.structures.push_back(parse_structure(name));
  }
}

void read_trainer_fields(const json& root, TrainConfig& trainer) {
  read_field(root, "batch_size", trainer.batch_size);
  read_field(root, "initial_lr", trainer.initial_lr);
  read_field(root, "lr_decay_factor", trainer.lr_decay_factor);
  read_field(root, "patience_updates", trainer.patience_updates);
  read_field(root, "adam_beta1", trainer.adam_beta1);
  read_field(root, "adam_beta2", trainer.adam_beta2);
  read_field(root, "adam_eps", trainer.adam_eps);
  read_field(root, "max_epochs", trainer.max_epochs);
  read_field(root, "lambda_o", trainer.hyper.lambda_o);
  read_field(root, "lambda_s", trainer.hyper.lambda_s);
  read_field(root, "sparsity_trigger", trainer.hyper.sparsity_trigger);
  read_field(root, "clip_norm", trainer.hyper.clip_norm);
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path, const FlagOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json root;
  try {
    root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(root, "config",
               {"treebank", "embeddings", "taxonomy", "mode", "objectives", "layers", "seeds",
                "data_seed", "output_dir", "epsilon", "synth", "batch_size", "initial_lr",
                "lr_decay_factor", "patience_updates", "adam_beta1", "adam_beta2", "adam_eps",
                "max_epochs", "lambda_o", "lambda_s", "sparsity_trigger", "clip_norm"});

  ExperimentConfig config;
  config.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

  read_treebank_paths(root, config);
  read_field(root, "embeddings", config.embeddings);
  std::string taxonomy;
  read_field(root, "taxonomy", taxonomy);
  if (!taxonomy.empty()) {
    config.taxonomy = resolve(config.config_dir, taxonomy);
    config.has_taxonomy = true;
  }

  std::string mode_name;
  read_field(root, "mode", mode_name);
  if (overrides.mode) mode_name = *overrides.mode;
  if (mode_name.empty()) throw ConfigError("mode: missing (set it in the config or via --mode)");
  config.mode = parse_mode(mode_name);

  std::vector<std::string> objective_names;
  read_field(root, "objectives", objective_names);
  if (!overrides.objectives.empty()) objective_names = overrides.objectives;
  for (const auto& name : objective_names) config.objectives.push_back(ObjectiveId::parse(name));

  read_field(root, "layers", config.layers);
  if (!overrides.layers.empty()) config.layers = overrides.layers;
  if (config.layers.empty()) {
    throw ConfigError("layers: missing (set it in the config or via --layers)");
  }

  read_field(root, "seeds", config.seeds);
  if (!overrides.seeds.empty()) config.seeds = overrides.seeds;
  if (config.seeds.empty()) {
    throw ConfigError("seeds: missing (set them in the config or via --seed)");
  }

  read_field(root, "data_seed", config.data_seed);

  std::string output_dir;
  read_field(root, "output_dir", output_dir);
  if (overrides.output_dir) output_dir = *overrides.output_dir;
  if (output_dir.empty()) throw ConfigError("output_dir: missing");
  config.output_dir = resolve(config.config_dir, output_dir);

  read_field(root, "epsilon", config.epsilon);
  if (overrides.epsilon) config.epsilon = *overrides.epsilon;

  read_trainer_fields(root, config.trainer);
  read_synth_spec(root, config);
  return config;
}

void validate_objectives(ExperimentConfig& config) {
  // Modes with a fixed objective set accept an empty list as shorthand.
  std::vector<ObjectiveId>& objectives = config.objectives;
  if (objectives.empty()) {
    switch (config.mode) {
      case Mode::C:
        for (Structure s : {Structure::Dep, Structure::Lex, Structure::Pos, Structure::Rand})
          objectives.push_back({s, Target::Distance});
        break;
      case Mode::D:
        for (Structure s : {Structure::Dep, Structure::Lex, Structure::Pos, Structure::Rand})
          objectives.push_back({s, Target::Depth});
        break;
      case Mode::E:
        for (ObjectiveId id : all_objectives()) objectives.push_back(id);
        break;
      default:
        break;
    }
  }
  validate_mode_objectives(config.mode, objectives);
  if (!config.has_taxonomy) {
    for (ObjectiveId id : objectives) {
      if (id.structure == Structure::Lex) {
        throw ConfigError("taxonomy: lex objectives require a taxonomy file");
      }
    }
  }
}

std::filesystem::path embeddings_path(const ExperimentConfig& config, std::string_view split,
                                      int layer) {
  if (config.embeddings.empty()) throw ConfigError("embeddings: missing path pattern");
  std::string pattern = config.embeddings;
  auto substitute = [&pattern](std::string_view key, const std::string& value) {
    bool found = false;
    for (std::size_t pos = pattern.find(key); pos != std::string::npos;
         pos = pattern.find(key, pos + value.size())) {
      pattern.replace(pos, key.size(), value);
      found = true;
    }
    return found;
  };
  if (!substitute("{split}", std::string(split))) {
    throw ConfigError("embeddings: pattern needs a {split} placeholder");
  }
  const bool has_layer = substitute("{layer}", std::to_string(layer));
  if (!has_layer && config.layers.size() > 1) {
    throw ConfigError("embeddings: pattern needs a {layer} placeholder for multi-layer runs");
  }
  return resolve(config.config_dir, pattern);
}

std::filesystem::path checkpoint_path(const ExperimentConfig& config, int layer,
                                      std::uint64_t seed) {
  return config.output_dir / "checkpoints" /
         ("layer" + std::to_string(layer) + "_seed" + std::to_string(seed) + ".opckp");
}

std::filesystem::path history_path(const ExperimentConfig& config, int layer, std::uint64_t seed) {
  return config.output_dir / "history" /
         ("layer" + std::to_string(layer) + "_seed" + std::to_string(seed) + ".json");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed while writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<AnnotatedSentence> load_treebank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open treebank " + path.string());
  return parse_conllu(in);
}

EmbeddingSet load_embedding_file(const std::filesystem::path& path,
                                 const std::vector<AnnotatedSentence>& treebank) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embeddings " + path.string());
  return read_embeddings(in, treebank);
}

Taxonomy load_taxonomy_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open taxonomy " + path.string());
  return Taxonomy::load(in);
}

unsigned worker_cap() {
  if (const char* env = std::getenv("ORTHO_PROBE_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || value < 1) {
      throw ConfigError("ORTHO_PROBE_THREADS: expected a positive integer");
    }
    return static_cast<unsigned>(value);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace ortho::cli
