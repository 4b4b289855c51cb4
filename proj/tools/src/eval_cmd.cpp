#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "orthoprobe/checkpoint.hpp"
#include "orthoprobe/errors.hpp"
#include "orthoprobe/evaluation.hpp"

namespace ortho::cli {

namespace {

using nlohmann::json;

struct ParseRow {
  int layer = 0;
  std::uint64_t seed = 0;
  ParseScore score;
};

std::string parse_rows_to_tsv(const std::vector<ParseRow>& rows) {
  std::ostringstream out;
  out << "layer\tseed\tuuas\tuas\tn_edges\tn_tokens\n";
  for (const ParseRow& row : rows) {
    out << row.layer << '\t' << row.seed << '\t' << row.score.uuas << '\t' << row.score.uas
        << '\t' << row.score.n_edges << '\t' << row.score.n_tokens << '\n';
  }
  return out.str();
}

}  // namespace

void cmd_eval(ExperimentConfig& config) {
  validate_objectives(config);

  const bool wants_random = std::any_of(config.objectives.begin(), config.objectives.end(),
                                        [](ObjectiveId id) { return id.structure == Structure::Rand; });
  const bool wants_parse =
      std::count(config.objectives.begin(), config.objectives.end(),
                 ObjectiveId{Structure::Dep, Target::Depth}) > 0 &&
      std::count(config.objectives.begin(), config.objectives.end(),
                 ObjectiveId{Structure::Dep, Target::Distance}) > 0;

  const auto test_treebank = load_treebank(config.test_conllu);
  std::vector<AnnotatedSentence> train_treebank;
  if (wants_random) train_treebank = load_treebank(config.train_conllu);

  std::optional<Taxonomy> taxonomy;
  if (config.has_taxonomy) taxonomy = load_taxonomy_file(config.taxonomy);
  DatasetOptions options;
  options.data_seed = config.data_seed;
  options.taxonomy = taxonomy ? &*taxonomy : nullptr;

  std::vector<ObjectiveId> random_objectives;
  for (ObjectiveId id : config.objectives) {
    if (id.structure == Structure::Rand) random_objectives.push_back(id);
  }

  struct LayerData {
    EmbeddingSet test_embeddings;
    EmbeddingSet train_embeddings;
    ObjectiveData test;
    ObjectiveData train;  // random objectives only
  };
  std::map<int, LayerData> layers;
  for (int layer : config.layers) {
    LayerData& slot = layers[layer];
    slot.test_embeddings =
        load_embedding_file(embeddings_path(config, "test", layer), test_treebank);
    slot.test = build_examples(test_treebank, slot.test_embeddings, config.objectives, options);
    if (wants_random) {
      slot.train_embeddings =
          load_embedding_file(embeddings_path(config, "train", layer), train_treebank);
      slot.train = build_examples(train_treebank, slot.train_embeddings, random_objectives, options);
    }
  }

  std::vector<RawScore> scores;
  std::vector<ParseRow> parse_rows;
  for (int layer : config.layers) {
    const LayerData& slot = layers.at(layer);
    for (std::uint64_t seed : config.seeds) {
      const Checkpoint ckpt = load_checkpoint_file(checkpoint_path(config, layer, seed));
      if (ckpt.mode != config.mode) {
        throw ConfigError("mode: checkpoint for layer " + std::to_string(layer) + " seed " +
                          std::to_string(seed) + " was trained in mode " +
                          std::string(mode_name(ckpt.mode)) + ", config says " +
                          std::string(mode_name(config.mode)));
      }
      for (ObjectiveId objective : config.objectives) {
        const bool on_train = objective.structure == Structure::Rand;
        const std::vector<Example>& examples =
            on_train ? slot.train.at(objective) : slot.test.at(objective);
        RawScore raw;
        raw.layer = layer;
        raw.seed = seed;
        raw.objective = objective;
        raw.train_split = on_train;
        raw.summary = evaluate_objective(ckpt.params, objective, examples);
        scores.push_back(std::move(raw));
      }
      if (wants_parse) {
        parse_rows.push_back(
            {layer, seed, parse_score(ckpt.params, test_treebank, slot.test_embeddings)});
      }
    }
  }

  const EvalReport report = build_report(scores);
  json j = report_to_json(report);
  if (wants_parse) {
    json rows = json::array();
    for (const ParseRow& row : parse_rows) {
      rows.push_back({{"layer", row.layer},
                      {"seed", row.seed},
                      {"uuas", row.score.uuas},
                      {"uas", row.score.uas},
                      {"n_edges", row.score.n_edges},
                      {"n_tokens", row.score.n_tokens}});
    }
    j["parse"] = std::move(rows);
  }

  const std::filesystem::path eval_dir = config.output_dir / "eval";
  write_file_atomic(eval_dir / "report.json", j.dump(2) + "\n");
  std::cout << "wrote " << (eval_dir / "report.json").string() << "\n";
  write_file_atomic(eval_dir / "report.tsv", report_to_tsv(report));
  std::cout << "wrote " << (eval_dir / "report.tsv").string() << "\n";
  if (wants_parse) {
    write_file_atomic(eval_dir / "parse.tsv", parse_rows_to_tsv(parse_rows));
    std::cout << "wrote " << (eval_dir / "parse.tsv").string() << "\n";
  }
}

}  // namespace ortho::cli
