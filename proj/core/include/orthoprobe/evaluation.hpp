#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "orthoprobe/dataset.hpp"
#include "orthoprobe/embeddings.hpp"
#include "orthoprobe/probe.hpp"
#include "orthoprobe/treebank.hpp"

namespace ortho {

/// Spearman rank correlation with average ranks for ties. Undefined (nullopt)
/// for fewer than two points or when either side is constant.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

/// Average ranks (1-based, ties averaged); the rank transform behind spearman.
std::vector<double> average_ranks(const std::vector<double>& x);

/// Correlation between gold and predicted depths over the sentence's unmasked
/// tokens; nullopt when fewer than two are usable or a side is constant.
std::optional<double> sentence_depth_score(const Vector& pred, const GoldLabels& gold);

/// Per-token correlation between gold and predicted distance rows (unmasked,
/// excluding self), averaged over the sentence's scorable tokens.
std::optional<double> sentence_distance_score(const Matrix& pred, const GoldLabels& gold);

/// Length-grouped aggregate: sentences are bucketed by token count, scores
/// averaged within each bucket, and the bucket means averaged over lengths
/// 5..50.
struct CorrelationSummary {
  std::optional<double> mean;  // nullopt when no bucket had a score
  int n_used = 0;              // scored sentences inside the length range
  int n_skipped = 0;           // in-range sentences without a defined score
  int n_excluded = 0;          // sentences outside lengths 5..50
};

CorrelationSummary depth_correlation(const ProbeParams& params, ObjectiveId objective,
                                     const std::vector<Example>& examples);
CorrelationSummary distance_correlation(const ProbeParams& params, ObjectiveId objective,
                                        const std::vector<Example>& examples);

/// Dispatches on the objective's target.
CorrelationSummary evaluate_objective(const ProbeParams& params, ObjectiveId objective,
                                      const std::vector<Example>& examples);

/// Minimum spanning tree of a symmetric predicted-distance matrix, edges as
/// sorted (min, max) pairs. Ties break lexicographically on (i, j).
std::vector<std::pair<int, int>> extract_undirected_tree(const Matrix& pred_distances);

/// Fraction of gold tree edges recovered.
double uuas(const std::vector<std::pair<int, int>>& edges, const RootedTree& gold);

/// Orients the spanning tree away from the token of minimum predicted depth
/// (ties to the lowest index).
RootedTree extract_directed_tree(const Matrix& pred_distances, const Vector& pred_depths);

/// Fraction of tokens whose predicted head matches the gold head; the root
/// token counts as correct only when it is the gold root.
double uas(const RootedTree& predicted, const RootedTree& gold);

struct ParseScore {
  double uuas = 0.0;
  double uas = 0.0;
  std::int64_t n_edges = 0;   // undirected denominator, summed over sentences
  std::int64_t n_tokens = 0;  // directed denominator
};

/// Corpus-level attachment scores for a probe carrying both dep_distance and
/// dep_depth. Sentences shorter than two tokens are skipped.
ParseScore parse_score(const ProbeParams& params, const std::vector<AnnotatedSentence>& treebank,
                       const EmbeddingSet& embeddings);

/// One evaluated (layer, seed, objective) combination, the input to
/// build_report.
struct RawScore {
  int layer = 0;
  std::uint64_t seed = 0;
  ObjectiveId objective;
  bool train_split = false;  // random structures are scored on the train split
  CorrelationSummary summary;
};

struct EvalCell {
  int layer = 0;
  ObjectiveId objective;
  bool train_split = false;
  std::vector<double> per_seed;  // defined per-seed means, seed order
  int n_seeds_total = 0;
  std::optional<double> mean;
  double stddev = 0.0;  // sample standard deviation across seeds
  int n_sentences = 0;
};

struct ObjectiveBest {
  int layer = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Per-target summary: mean best correlation of the linguistic structures,
/// the random structure's best correlation, and their difference.
struct SelectivityRow {
  bool defined = false;
  double avg_linguistic = 0.0;
  double avg_random = 0.0;
  double selectivity = 0.0;
};

struct EvalReport {
  std::vector<int> layers;
  std::vector<std::uint64_t> seeds;
  std::vector<ObjectiveId> objectives;
  std::vector<EvalCell> cells;  // layer-major, objective-minor
  std::map<ObjectiveId, ObjectiveBest> best;
  std::map<Target, SelectivityRow> selectivity;
};

/// Aggregates raw scores into per-cell seed statistics, per-objective best
/// layers, and per-target selectivity rows.
EvalReport build_report(const std::vector<RawScore>& scores);

nlohmann::json report_to_json(const EvalReport& report);

/// One row per (layer, objective): layer, objective, split, n_seeds, mean,
/// stddev, n_sentences. Undefined means print as "NA".
std::string report_to_tsv(const EvalReport& report);

}  // namespace ortho
