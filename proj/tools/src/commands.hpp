#pragma once

#include <filesystem>

#include "experiment.hpp"

namespace ortho::cli {

/// Emits the synthetic treebank splits, the taxonomy, and one planted
/// embedding file per split and layer, at the paths the config names.
void cmd_synth(const ExperimentConfig& config);

/// Runs one training job per (layer, seed) and writes checkpoint plus
/// history files. Jobs whose outputs already exist are skipped unless force
/// is set.
void cmd_train(ExperimentConfig& config, bool force);

/// Scores every (layer, seed) checkpoint on the held-out split (train split
/// for random structures) and writes the aggregated report files.
void cmd_eval(ExperimentConfig& config);

struct AnalyzeOptions {
  bool overlap_requested = false;  // fail rather than skip when the mode lacks a shared rotation
  bool epsilon_sweep = false;
};

/// Dimension-selection reports per (layer, seed) checkpoint: dims.tsv always,
/// overlap and histogram for joint orthogonal modes.
void cmd_analyze(ExperimentConfig& config, const AnalyzeOptions& options);

/// Parses a CoNLL-U file and prints corpus statistics.
void cmd_inspect(const std::filesystem::path& path);

}  // namespace ortho::cli
