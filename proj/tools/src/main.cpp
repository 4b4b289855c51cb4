#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "orthoprobe/errors.hpp"

namespace {

constexpr const char* kModeHelp =
    "Training mode: A = one objective alone; B = one structure's depth and distance pair; "
    "C = the four distance objectives jointly; D = the four depth objectives jointly; "
    "E = all eight objectives jointly; I = scaling vectors only, rotation frozen at the "
    "identity; II = independent linear probe per objective";

struct CommonFlags {
  std::string config;
  std::string mode;
  std::string output_dir;
  ortho::cli::FlagOverrides overrides;

  ortho::cli::ExperimentConfig load() {
    if (!mode.empty()) overrides.mode = mode;
    if (!output_dir.empty()) overrides.output_dir = output_dir;
    return ortho::cli::load_config(config, overrides);
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--mode", flags.mode, kModeHelp);
  cmd->add_option("--layers", flags.overrides.layers, "Embedding layers to process")
      ->delimiter(',');
  cmd->add_option("--seed", flags.overrides.seeds, "Training seeds")->delimiter(',');
  cmd->add_option("--objectives", flags.overrides.objectives,
                  "Objective names such as dep_distance or pos_depth")
      ->delimiter(',');
  cmd->add_option("--output-dir", flags.output_dir, "Directory for generated artifacts");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural probe toolkit: synthetic corpora, probe training, evaluation, and "
               "scaling-vector analysis"};
  app.require_subcommand(1);

  CommonFlags synth_flags;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic treebank, taxonomy, and planted embeddings");
  add_common(synth, synth_flags);

  CommonFlags train_flags;
  bool force = false;
  CLI::App* train = app.add_subcommand("train", "Train one probe per (layer, seed)");
  add_common(train, train_flags);
  train->add_flag("--force", force, "Retrain runs whose outputs already exist");

  CommonFlags eval_flags;
  CLI::App* eval = app.add_subcommand("eval", "Score checkpoints and write report files");
  add_common(eval, eval_flags);

  CommonFlags analyze_flags;
  ortho::cli::AnalyzeOptions analyze_options;
  double epsilon = 0.0;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Dimension selection, overlap, and histogram reports");
  add_common(analyze, analyze_flags);
  analyze->add_option("--epsilon", epsilon, "Magnitude threshold for selecting dimensions");
  analyze->add_flag("--overlap", analyze_options.overlap_requested,
                    "Require the pairwise overlap table (joint modes only)");
  analyze->add_flag("--epsilon-sweep", analyze_options.epsilon_sweep,
                    "Also write selection counts over a grid of thresholds");

  std::string inspect_path;
  CLI::App* inspect = app.add_subcommand("inspect-conllu", "Print treebank statistics");
  inspect->add_option("file", inspect_path, "CoNLL-U file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      const ortho::cli::ExperimentConfig config = synth_flags.load();
      ortho::cli::cmd_synth(config);
    } else if (*train) {
      ortho::cli::ExperimentConfig config = train_flags.load();
      ortho::cli::cmd_train(config, force);
    } else if (*eval) {
      ortho::cli::ExperimentConfig config = eval_flags.load();
      ortho::cli::cmd_eval(config);
    } else if (*analyze) {
      if (epsilon != 0.0) analyze_flags.overrides.epsilon = epsilon;
      ortho::cli::ExperimentConfig config = analyze_flags.load();
      ortho::cli::cmd_analyze(config, analyze_options);
    } else if (*inspect) {
      ortho::cli::cmd_inspect(inspect_path);
    }
  } catch (const ortho::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ortho::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const ortho::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
