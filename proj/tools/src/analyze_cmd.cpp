#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

#include "commands.hpp"
#include "orthoprobe/analysis.hpp"
#include "orthoprobe/checkpoint.hpp"
#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho::cli {

namespace {

constexpr double kSweepEpsilons[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7};

bool joint_mode(Mode mode) {
  return mode == Mode::B || mode == Mode::C || mode == Mode::D || mode == Mode::E;
}

}  // namespace

void cmd_analyze(ExperimentConfig& config, const AnalyzeOptions& options) {
  validate_objectives(config);
  if (!mode_is_orthogonal(config.mode)) {
    throw ConfigError("mode: the linear baseline has no scaling vectors to analyze");
  }
  const bool joint = joint_mode(config.mode);
  if (options.overlap_requested && !joint) {
    throw ConfigError("mode: overlap table requires a shared rotation (modes B, C, D, E)");
  }

  const bool wants_random = std::any_of(config.objectives.begin(), config.objectives.end(),
                                        [](ObjectiveId id) { return id.structure == Structure::Rand; });
  const auto test_treebank = load_treebank(config.test_conllu);
  std::vector<AnnotatedSentence> train_treebank;
  if (wants_random) train_treebank = load_treebank(config.train_conllu);

  std::optional<Taxonomy> taxonomy;
  if (config.has_taxonomy) taxonomy = load_taxonomy_file(config.taxonomy);
  DatasetOptions data_options;
  data_options.data_seed = config.data_seed;
  data_options.taxonomy = taxonomy ? &*taxonomy : nullptr;

  std::vector<ObjectiveId> random_objectives;
  for (ObjectiveId id : config.objectives) {
    if (id.structure == Structure::Rand) random_objectives.push_back(id);
  }

  struct LayerData {
    EmbeddingSet test_embeddings;
    EmbeddingSet train_embeddings;
    ObjectiveData test;
    ObjectiveData train;
  };
  std::map<int, LayerData> layers;
  for (int layer : config.layers) {
    LayerData& slot = layers[layer];
    slot.test_embeddings =
        load_embedding_file(embeddings_path(config, "test", layer), test_treebank);
    slot.test = build_examples(test_treebank, slot.test_embeddings, config.objectives, data_options);
    if (wants_random) {
      slot.train_embeddings =
          load_embedding_file(embeddings_path(config, "train", layer), train_treebank);
      slot.train =
          build_examples(train_treebank, slot.train_embeddings, random_objectives, data_options);
    }
  }

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
      const auto& probe = std::get<OrthogonalProbeParams>(ckpt.params);

      std::vector<DimSelection> selections;
      std::vector<DimReportRow> rows;
      for (ObjectiveId objective : config.objectives) {
        if (!probe.scalers.contains(objective)) {
          throw ConfigError("objectives: checkpoint lacks objective " + objective.name());
        }
        const DimSelection selection =
            select_dimensions(probe.scalers.at(objective), objective, config.epsilon);
        const std::vector<Example>& examples = objective.structure == Structure::Rand
                                                   ? slot.train.at(objective)
                                                   : slot.test.at(objective);
        DimReportRow row;
        row.objective = objective;
        row.n_selected = static_cast<int>(selection.selected.size());
        row.correlation_full = evaluate_objective(ckpt.params, objective, examples).mean;
        row.correlation_masked =
            masked_evaluate(probe, objective, selection.selected, examples).mean;
        const std::uint64_t drop_seed = rng::combine(seed, rng::fnv1a(objective.name()));
        row.drop25 = dimension_drop_cv(probe, objective, selection, 0.25, drop_seed, examples).mean;
        row.drop33 =
            dimension_drop_cv(probe, objective, selection, 1.0 / 3.0, drop_seed, examples).mean;
        row.drop50 = dimension_drop_cv(probe, objective, selection, 0.5, drop_seed, examples).mean;
        rows.push_back(std::move(row));
        selections.push_back(selection);
      }

      const std::filesystem::path run_dir =
          config.output_dir / "analysis" /
          ("layer" + std::to_string(layer) + "_seed" + std::to_string(seed));
      write_file_atomic(run_dir / "dims.tsv", dims_to_tsv(rows));
      std::cout << "wrote " << (run_dir / "dims.tsv").string() << "\n";

      if (joint) {
        write_file_atomic(run_dir / "overlap.tsv", overlap_to_tsv(overlap_table(selections)));
        std::cout << "wrote " << (run_dir / "overlap.tsv").string() << "\n";
        write_file_atomic(run_dir / "histogram.tsv",
                          histogram_to_tsv(histogram_export(probe, config.objectives, selections)));
        std::cout << "wrote " << (run_dir / "histogram.tsv").string() << "\n";
      }

      if (options.epsilon_sweep) {
        std::ostringstream sweep;
        sweep << "epsilon\tobjective\tn_selected\n";
        for (double epsilon : kSweepEpsilons) {
          for (ObjectiveId objective : config.objectives) {
            const DimSelection s = select_dimensions(probe.scalers.at(objective), objective, epsilon);
            sweep << epsilon << '\t' << objective.name() << '\t' << s.selected.size() << '\n';
          }
        }
        write_file_atomic(run_dir / "epsilon_sweep.tsv", sweep.str());
        std::cout << "wrote " << (run_dir / "epsilon_sweep.tsv").string() << "\n";
      }
    }
  }
}

}  // namespace ortho::cli
