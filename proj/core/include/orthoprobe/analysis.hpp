#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orthoprobe/dataset.hpp"
#include "orthoprobe/evaluation.hpp"
#include "orthoprobe/probe.hpp"

namespace ortho {

/// Indices of scaling-vector entries with magnitude above epsilon.
struct DimSelection {
  ObjectiveId objective;
  double epsilon = 1e-4;
  int dim = 0;
  std::vector<int> selected;  // sorted ascending
};

DimSelection select_dimensions(const Vector& d, ObjectiveId objective, double epsilon);

/// Copy of the probe with the objective's scaling entries outside the mask
/// zeroed; the original is untouched.
OrthogonalProbeParams apply_mask(const OrthogonalProbeParams& params, ObjectiveId objective,
                                 const std::vector<int>& mask);

/// Evaluation restricted to the masked dimensions. An empty mask yields a
/// zero predictor, so every sentence is skipped and the summary mean is
/// undefined.
CorrelationSummary masked_evaluate(const OrthogonalProbeParams& params, ObjectiveId objective,
                                   const std::vector<int>& mask,
                                   const std::vector<Example>& examples);

/// Seeded partition of the selection into k disjoint exhaustive subsets with
/// sizes differing by at most one.
std::vector<std::vector<int>> partition_selection(const std::vector<int>& selected, int k,
                                                  std::uint64_t seed);

struct DropCvResult {
  std::vector<std::optional<double>> per_subset;  // score with that subset removed
  std::optional<double> mean;                     // over the defined subset scores
};

/// Splits the selection into round(1/drop_fraction) subsets and re-evaluates
/// with each subset dropped from the mask.
DropCvResult dimension_drop_cv(const OrthogonalProbeParams& params, ObjectiveId objective,
                               const DimSelection& selection, double drop_fraction,
                               std::uint64_t seed, const std::vector<Example>& examples);

/// Pairwise shared-dimension counts; the diagonal holds selection sizes.
struct OverlapTable {
  std::vector<ObjectiveId> objectives;
  std::vector<std::vector<int>> counts;
};

OverlapTable overlap_table(const std::vector<DimSelection>& selections);

/// Selected-dimension counts per objective over consecutive bins of the
/// reordered coordinate axis. Coordinates are sorted by descending
/// Σ_k 10^(K-1-k)·|d̄_k[i]| over the K listed objectives, so the first listed
/// objective dominates the ordering; ties fall back to the coordinate index.
struct HistogramExport {
  std::vector<ObjectiveId> objectives;
  std::vector<int> permutation;  // rank -> original coordinate
  std::vector<std::vector<int>> counts;  // bin × objective
  int bin_size = 10;
};

HistogramExport histogram_export(const OrthogonalProbeParams& params,
                                 const std::vector<ObjectiveId>& objectives,
                                 const std::vector<DimSelection>& selections, int bin_size = 10);

/// One row of the per-objective dimension report.
struct DimReportRow {
  ObjectiveId objective;
  int n_selected = 0;
  std::optional<double> correlation_full;
  std::optional<double> correlation_masked;
  std::optional<double> drop25;
  std::optional<double> drop33;
  std::optional<double> drop50;
};

std::string dims_to_tsv(const std::vector<DimReportRow>& rows);
std::string overlap_to_tsv(const OverlapTable& table);
std::string histogram_to_tsv(const HistogramExport& histogram);

}  // namespace ortho
