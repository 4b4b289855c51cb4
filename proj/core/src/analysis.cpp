#include "orthoprobe/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

DimSelection select_dimensions(const Vector& d, ObjectiveId objective, double epsilon) {
  if (epsilon <= 0) throw ConfigError("epsilon must be positive");
  DimSelection selection;
  selection.objective = objective;
  selection.epsilon = epsilon;
  selection.dim = static_cast<int>(d.size());
  for (int i = 0; i < selection.dim; ++i) {
    if (std::abs(d(i)) > epsilon) selection.selected.push_back(i);
  }
  return selection;
}

OrthogonalProbeParams apply_mask(const OrthogonalProbeParams& params, ObjectiveId objective,
                                 const std::vector<int>& mask) {
  const auto it = params.scalers.find(objective);
  if (it == params.scalers.end()) {
    throw ConfigError("probe has no scaling vector for objective " + objective.name());
  }
  const int dim = static_cast<int>(it->second.size());
  Vector masked = Vector::Zero(dim);
  for (int i : mask) {
    if (i < 0 || i >= dim) {
      throw ConfigError("mask index " + std::to_string(i) + " outside dimension range");
    }
    masked(i) = it->second(i);
  }
  OrthogonalProbeParams out = params;
  out.scalers[objective] = std::move(masked);
  return out;
}

CorrelationSummary masked_evaluate(const OrthogonalProbeParams& params, ObjectiveId objective,
                                   const std::vector<int>& mask,
                                   const std::vector<Example>& examples) {
  const ProbeParams masked = apply_mask(params, objective, mask);
  return evaluate_objective(masked, objective, examples);
}

std::vector<std::vector<int>> partition_selection(const std::vector<int>& selected, int k,
                                                  std::uint64_t seed) {
  if (k < 1) throw ConfigError("subset count must be positive");
  std::vector<int> shuffled = selected;
  auto gen = rng::engine(seed);
  rng::shuffle(shuffled, gen);
  const int n = static_cast<int>(shuffled.size());
  const int base = n / k;
  const int extra = n % k;  // first `extra` subsets get one more element
  std::vector<std::vector<int>> subsets(k);
  int pos = 0;
  for (int s = 0; s < k; ++s) {
    const int size = base + (s < extra ? 1 : 0);
    subsets[s].assign(shuffled.begin() + pos, shuffled.begin() + pos + size);
    std::sort(subsets[s].begin(), subsets[s].end());
    pos += size;
  }
  return subsets;
}

DropCvResult dimension_drop_cv(const OrthogonalProbeParams& params, ObjectiveId objective,
                               const DimSelection& selection, double drop_fraction,
                               std::uint64_t seed, const std::vector<Example>& examples) {
  if (drop_fraction <= 0.0 || drop_fraction >= 1.0) {
    throw ConfigError("drop_fraction must lie strictly between 0 and 1");
  }
  if (selection.selected.empty()) throw ConfigError("cannot drop from an empty selection");
  const int k = static_cast<int>(std::lround(1.0 / drop_fraction));
  const auto subsets = partition_selection(selection.selected, k, seed);
  DropCvResult result;
  double sum = 0.0;
  int defined = 0;
  for (const auto& subset : subsets) {
    std::vector<int> mask;
    std::set_difference(selection.selected.begin(), selection.selected.end(), subset.begin(),
                        subset.end(), std::back_inserter(mask));
    const CorrelationSummary summary = masked_evaluate(params, objective, mask, examples);
    result.per_subset.push_back(summary.mean);
    if (summary.mean) {
      sum += *summary.mean;
      ++defined;
    }
  }
  if (defined > 0) result.mean = sum / defined;
  return result;
}

OverlapTable overlap_table(const std::vector<DimSelection>& selections) {
  if (selections.empty()) throw ConfigError("overlap table needs at least one selection");
  const int dim = selections.front().dim;
  for (const DimSelection& s : selections) {
    if (s.dim != dim) {
      throw ConfigError("selections come from probes of different dimension");
    }
  }
  const int k = static_cast<int>(selections.size());
  OverlapTable table;
  for (const DimSelection& s : selections) table.objectives.push_back(s.objective);
  table.counts.assign(k, std::vector<int>(k, 0));
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      std::vector<int> shared;
      std::set_intersection(selections[a].selected.begin(), selections[a].selected.end(),
                            selections[b].selected.begin(), selections[b].selected.end(),
                            std::back_inserter(shared));
      table.counts[a][b] = table.counts[b][a] = static_cast<int>(shared.size());
    }
  }
  return table;
}

HistogramExport histogram_export(const OrthogonalProbeParams& params,
                                 const std::vector<ObjectiveId>& objectives,
                                 const std::vector<DimSelection>& selections, int bin_size) {
  if (objectives.empty()) throw ConfigError("histogram needs at least one objective");
  if (objectives.size() != selections.size()) {
    throw ConfigError("histogram needs one selection per objective");
  }
  if (bin_size < 1) throw ConfigError("bin_size must be positive");
  const int dim = params.dim();
  std::vector<double> score(dim, 0.0);
  const int k = static_cast<int>(objectives.size());
  for (int o = 0; o < k; ++o) {
    const auto it = params.scalers.find(objectives[o]);
    if (it == params.scalers.end()) {
      throw ConfigError("probe has no scaling vector for objective " + objectives[o].name());
    }
    const double weight = std::pow(10.0, static_cast<double>(k - 1 - o));
    for (int i = 0; i < dim; ++i) score[i] += weight * std::abs(it->second(i));
  }

  HistogramExport histogram;
  histogram.objectives = objectives;
  histogram.bin_size = bin_size;
  histogram.permutation.resize(dim);
  std::iota(histogram.permutation.begin(), histogram.permutation.end(), 0);
  std::sort(histogram.permutation.begin(), histogram.permutation.end(), [&score](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  std::vector<int> rank(dim);
  for (int r = 0; r < dim; ++r) rank[histogram.permutation[r]] = r;

  const int n_bins = (dim + bin_size - 1) / bin_size;
  histogram.counts.assign(n_bins, std::vector<int>(k, 0));
  for (int o = 0; o < k; ++o) {
    if (selections[o].dim != dim) {
      throw ConfigError("selection dimension does not match the probe");
    }
    for (int i : selections[o].selected) {
      histogram.counts[rank[i] / bin_size][o] += 1;
    }
  }
  return histogram;
}

namespace {

void append_optional(std::ostringstream& out, const std::optional<double>& v) {
  if (v) {
    out << *v;
  } else {
    out << "NA";
  }
}

}  // namespace

std::string dims_to_tsv(const std::vector<DimReportRow>& rows) {
  std::ostringstream out;
  out << "objective\tn_selected\tcorrelation_full\tcorrelation_masked\tdrop25\tdrop33\tdrop50\n";
  for (const DimReportRow& row : rows) {
    out << row.objective.name() << '\t' << row.n_selected << '\t';
    append_optional(out, row.correlation_full);
    out << '\t';
    append_optional(out, row.correlation_masked);
    out << '\t';
    append_optional(out, row.drop25);
    out << '\t';
    append_optional(out, row.drop33);
    out << '\t';
    append_optional(out, row.drop50);
    out << '\n';
  }
  return out.str();
}

std::string overlap_to_tsv(const OverlapTable& table) {
  std::ostringstream out;
  out << "objective";
  for (ObjectiveId objective : table.objectives) out << '\t' << objective.name();
  out << '\n';
  for (std::size_t a = 0; a < table.objectives.size(); ++a) {
    out << table.objectives[a].name();
    for (std::size_t b = 0; b < table.objectives.size(); ++b) out << '\t' << table.counts[a][b];
    out << '\n';
  }
  return out.str();
}

std::string histogram_to_tsv(const HistogramExport& histogram) {
  std::ostringstream out;
  out << "bin\tobjective\tcount\n";
  for (std::size_t bin = 0; bin < histogram.counts.size(); ++bin) {
    for (std::size_t o = 0; o < histogram.objectives.size(); ++o) {
      out << bin << '\t' << histogram.objectives[o].name() << '\t' << histogram.counts[bin][o]
          << '\n';
    }
  }
  return out.str();
}

}  // namespace ortho
