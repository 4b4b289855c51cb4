#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orthoprobe/dataset.hpp"
#include "orthoprobe/embeddings.hpp"
#include "orthoprobe/trainer.hpp"
#include "orthoprobe/treebank.hpp"

namespace ortho::cli {

/// Recipe for the synthetic corpus: sentence counts per split, a length
/// range, and the planted-embedding parameters.
struct SynthSpec {
  int train_sentences = 300;
  int dev_sentences = 50;
  int test_sentences = 50;
  int min_length = 5;
  int max_length = 20;
  int ambient_dim = 64;
  std::vector<Structure> structures = {Structure::Dep};
  double noise_scale = 0.1;
  std::uint64_t rotation_seed = 1;
};

/// Command-line values that take precedence over the config file.
struct FlagOverrides {
  std::optional<std::string> mode;
  std::vector<int> layers;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> objectives;
  std::optional<std::string> output_dir;
  std::optional<double> epsilon;
};

/// One experiment, fully resolved: file locations, the mode/objective
/// selection, the layer and seed grids, and the trainer settings. Relative
/// paths in the file resolve against the config's own directory.
struct ExperimentConfig {
  std::filesystem::path config_dir;
  std::filesystem::path train_conllu;
  std::filesystem::path dev_conllu;
  std::filesystem::path test_conllu;
  std::string embeddings;  // pattern with {split} and {layer} placeholders
  std::filesystem::path taxonomy;
  bool has_taxonomy = false;
  Mode mode = Mode::A;
  std::vector<ObjectiveId> objectives;
  std::vector<int> layers;
  std::vector<std::uint64_t> seeds;
  std::uint64_t data_seed = 0;
  std::filesystem::path output_dir;
  TrainConfig trainer;
  SynthSpec synth;
  double epsilon = 1e-4;
};

/// Parses the JSON config, applies flag overrides, and validates the parts
/// every command needs (mode present, layers and seeds nonempty, known keys
/// only). Mode-objective consistency is checked separately because synth
/// does not need objectives.
ExperimentConfig load_config(const std::filesystem::path& path, const FlagOverrides& overrides);

/// Mode-objective consistency plus the taxonomy requirement for lex
/// objectives. Fills the canonical objective set for modes C, D, and E when
/// the list is empty. Throws ConfigError naming the offending field.
void validate_objectives(ExperimentConfig& config);

std::filesystem::path embeddings_path(const ExperimentConfig& config, std::string_view split,
                                      int layer);
std::filesystem::path checkpoint_path(const ExperimentConfig& config, int layer,
                                      std::uint64_t seed);
std::filesystem::path history_path(const ExperimentConfig& config, int layer, std::uint64_t seed);

/// Writes to a sibling temp file and renames into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<AnnotatedSentence> load_treebank(const std::filesystem::path& path);
EmbeddingSet load_embedding_file(const std::filesystem::path& path,
                                 const std::vector<AnnotatedSentence>& treebank);
Taxonomy load_taxonomy_file(const std::filesystem::path& path);

/// Worker cap for per-(layer, seed) parallelism: ORTHO_PROBE_THREADS when
/// set, otherwise the hardware concurrency.
unsigned worker_cap();

}  // namespace ortho::cli
