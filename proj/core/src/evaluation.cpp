#include "orthoprobe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "orthoprobe/errors.hpp"

namespace ortho {

namespace {

constexpr int kMinLength = 5;
constexpr int kMaxLength = 50;

double pearson_or_nan(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cov / std::sqrt(var_a * var_b);
}

struct LengthGroups {
  std::map<int, std::pair<double, int>> groups;  // length -> (score sum, count)
  CorrelationSummary summary;

  void add(int length, std::optional<double> score) {
    if (length < kMinLength || length > kMaxLength) {
      ++summary.n_excluded;
      return;
    }
    if (!score) {
      ++summary.n_skipped;
      return;
    }
    auto& [sum, count] = groups[length];
    sum += *score;
    ++count;
    ++summary.n_used;
  }

  CorrelationSummary finish() {
    if (!groups.empty()) {
      double total = 0.0;
      for (const auto& [length, entry] : groups) total += entry.first / entry.second;
      summary.mean = total / static_cast<double>(groups.size());
    }
    return summary;
  }
};

}  // namespace

std::vector<double> average_ranks(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&x](int i, int j) { return x[i] < x[j]; });
  std::vector<double> ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (i + j) / 2.0 + 1.0;  // average of 1-based positions
    for (int k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ConfigError("spearman inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  const double rho = pearson_or_nan(average_ranks(a), average_ranks(b));
  if (std::isnan(rho)) return std::nullopt;
  return rho;
}

std::optional<double> sentence_depth_score(const Vector& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  if (pred.size() != s) throw ConfigError("prediction shape mismatch");
  std::vector<double> g, p;
  for (int i = 0; i < s; ++i) {
    if (!gold.depth_valid(i)) continue;
    g.push_back(gold.depths(i));
    p.push_back(pred(i));
  }
  return spearman(g, p);
}

std::optional<double> sentence_distance_score(const Matrix& pred, const GoldLabels& gold) {
  const int s = gold.token_count();
  if (pred.rows() != s || pred.cols() != s) throw ConfigError("prediction shape mismatch");
  double sum = 0.0;
  int scored = 0;
  std::vector<double> g, p;
  for (int i = 0; i < s; ++i) {
    g.clear();
    p.clear();
    for (int j = 0; j < s; ++j) {
      if (i == j || !gold.pair_valid(i, j)) continue;
      g.push_back(gold.distances(i, j));
      p.push_back(pred(i, j));
    }
    if (const auto rho = spearman(g, p)) {
      sum += *rho;
      ++scored;
    }
  }
  if (scored == 0) return std::nullopt;
  return sum / scored;
}

CorrelationSummary depth_correlation(const ProbeParams& params, ObjectiveId objective,
                                     const std::vector<Example>& examples) {
  LengthGroups agg;
  for (const Example& ex : examples) {
    const auto score = sentence_depth_score(predict_depths(params, objective, *ex.embedding),
                                            ex.gold);
    agg.add(ex.gold.token_count(), score);
  }
  return agg.finish();
}

CorrelationSummary distance_correlation(const ProbeParams& params, ObjectiveId objective,
                                        const std::vector<Example>& examples) {
  LengthGroups agg;
  for (const Example& ex : examples) {
    const auto score = sentence_distance_score(
        predict_distances(params, objective, *ex.embedding), ex.gold);
    agg.add(ex.gold.token_count(), score);
  }
  return agg.finish();
}

CorrelationSummary evaluate_objective(const ProbeParams& params, ObjectiveId objective,
                                      const std::vector<Example>& examples) {
  if (objective.target == Target::Distance) {
    return distance_correlation(params, objective, examples);
  }
  return depth_correlation(params, objective, examples);
}

std::vector<std::pair<int, int>> extract_undirected_tree(const Matrix& pred_distances) {
  const int n = static_cast<int>(pred_distances.rows());
  if (pred_distances.cols() != n || n < 2) {
    throw ConfigError("distance matrix must be square with at least two tokens");
  }
  if ((pred_distances - pred_distances.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError("distance matrix must be symmetric");
  }
  struct Candidate {
    double w;
    int i, j;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) candidates.push_back({pred_distances(i, j), i, j});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<int> find(n);
  std::iota(find.begin(), find.end(), 0);
  const auto root_of = [&find](int x) {
    while (find[x] != x) {
      find[x] = find[find[x]];
      x = find[x];
    }
    return x;
  };
  std::vector<std::pair<int, int>> edges;
  for (const Candidate& c : candidates) {
    const int a = root_of(c.i);
    const int b = root_of(c.j);
    if (a == b) continue;
    find[a] = b;
    edges.emplace_back(c.i, c.j);
    if (static_cast<int>(edges.size()) == n - 1) break;
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

double uuas(const std::vector<std::pair<int, int>>& edges, const RootedTree& gold) {
  const auto gold_edges = gold.edge_list();
  if (gold_edges.empty()) throw ConfigError("gold tree needs at least one edge");
  std::vector<std::pair<int, int>> sorted = edges;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<int, int>> shared;
  std::set_intersection(sorted.begin(), sorted.end(), gold_edges.begin(), gold_edges.end(),
                        std::back_inserter(shared));
  return static_cast<double>(shared.size()) / static_cast<double>(gold_edges.size());
}

RootedTree extract_directed_tree(const Matrix& pred_distances, const Vector& pred_depths) {
  const int n = static_cast<int>(pred_distances.rows());
  if (pred_depths.size() != n) throw ConfigError("depth prediction length mismatch");
  const auto edges = extract_undirected_tree(pred_distances);
  int root = 0;
  for (int i = 1; i < n; ++i) {
    if (pred_depths(i) < pred_depths(root)) root = i;
  }
  return RootedTree::from_edges(n, edges, root);
}

double uas(const RootedTree& predicted, const RootedTree& gold) {
  if (predicted.size() != gold.size()) throw ConfigError("tree sizes differ");
  const auto pred_heads = predicted.heads();
  const auto gold_heads = gold.heads();
  int correct = 0;
  for (std::size_t i = 0; i < pred_heads.size(); ++i) {
    if (pred_heads[i] == gold_heads[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred_heads.size());
}

ParseScore parse_score(const ProbeParams& params, const std::vector<AnnotatedSentence>& treebank,
                       const EmbeddingSet& embeddings) {
  if (treebank.size() != embeddings.sentences.size()) {
    throw DataError("treebank and embeddings disagree on sentence count");
  }
  const ObjectiveId dist_obj{Structure::Dep, Target::Distance};
  const ObjectiveId depth_obj{Structure::Dep, Target::Depth};
  std::int64_t correct_edges = 0, total_edges = 0;
  std::int64_t correct_heads = 0, total_tokens = 0;
  for (std::size_t s = 0; s < treebank.size(); ++s) {
    const int n = treebank[s].size();
    if (n < 2) continue;
    std::vector<int> heads(treebank[s].tokens.size());
    for (std::size_t i = 0; i < heads.size(); ++i) heads[i] = treebank[s].tokens[i].head;
    const RootedTree gold = RootedTree::from_heads(heads);
    const Matrix pred_dist = predict_distances(params, dist_obj, embeddings.sentences[s]);
    const Vector pred_depth = predict_depths(params, depth_obj, embeddings.sentences[s]);
    const auto undirected = extract_undirected_tree(pred_dist);
    const auto gold_edges = gold.edge_list();
    std::vector<std::pair<int, int>> shared;
    std::set_intersection(undirected.begin(), undirected.end(), gold_edges.begin(),
                          gold_edges.end(), std::back_inserter(shared));
    correct_edges += static_cast<std::int64_t>(shared.size());
    total_edges += n - 1;
    const RootedTree directed = extract_directed_tree(pred_dist, pred_depth);
    const auto pred_heads = directed.heads();
    const auto gold_heads = gold.heads();
    for (int i = 0; i < n; ++i) {
      if (pred_heads[i] == gold_heads[i]) ++correct_heads;
    }
    total_tokens += n;
  }
  if (total_edges == 0) throw DataError("no sentence with at least two tokens to parse");
  ParseScore score;
  score.n_edges = total_edges;
  score.n_tokens = total_tokens;
  score.uuas = static_cast<double>(correct_edges) / static_cast<double>(total_edges);
  score.uas = static_cast<double>(correct_heads) / static_cast<double>(total_tokens);
  return score;
}

EvalReport build_report(const std::vector<RawScore>& scores) {
  EvalReport report;
  std::vector<std::pair<int, ObjectiveId>> keys;
  for (const RawScore& raw : scores) {
    if (std::find(report.layers.begin(), report.layers.end(), raw.layer) == report.layers.end()) {
      report.layers.push_back(raw.layer);
    }
    if (std::find(report.seeds.begin(), report.seeds.end(), raw.seed) == report.seeds.end()) {
      report.seeds.push_back(raw.seed);
    }
    if (std::find(report.objectives.begin(), report.objectives.end(), raw.objective) ==
        report.objectives.end()) {
      report.objectives.push_back(raw.objective);
    }
  }
  std::sort(report.layers.begin(), report.layers.end());
  std::sort(report.objectives.begin(), report.objectives.end());

  for (int layer : report.layers) {
    for (ObjectiveId objective : report.objectives) {
      EvalCell cell;
      cell.layer = layer;
      cell.objective = objective;
      bool any = false;
      for (std::uint64_t seed : report.seeds) {
        for (const RawScore& raw : scores) {
          if (raw.layer != layer || raw.objective != objective || raw.seed != seed) continue;
          any = true;
          ++cell.n_seeds_total;
          cell.train_split = raw.train_split;
          if (raw.summary.mean) {
            cell.per_seed.push_back(*raw.summary.mean);
            if (cell.n_sentences == 0) cell.n_sentences = raw.summary.n_used;
          }
        }
      }
      if (!any) continue;
      if (!cell.per_seed.empty()) {
        const double mean = std::accumulate(cell.per_seed.begin(), cell.per_seed.end(), 0.0) /
                            static_cast<double>(cell.per_seed.size());
        cell.mean = mean;
        if (cell.per_seed.size() > 1) {
          double ss = 0.0;
          for (double x : cell.per_seed) ss += (x - mean) * (x - mean);
          cell.stddev = std::sqrt(ss / static_cast<double>(cell.per_seed.size() - 1));
        }
      }
      report.cells.push_back(std::move(cell));
    }
  }

  for (const EvalCell& cell : report.cells) {
    if (!cell.mean) continue;
    const auto it = report.best.find(cell.objective);
    if (it == report.best.end() || *cell.mean > it->second.mean) {
      report.best[cell.objective] = ObjectiveBest{cell.layer, *cell.mean, cell.stddev};
    }
  }

  for (Target target : {Target::Depth, Target::Distance}) {
    SelectivityRow row;
    double linguistic_sum = 0.0;
    int linguistic_count = 0;
    std::optional<double> random_best;
    for (const auto& [objective, best] : report.best) {
      if (objective.target != target) continue;
      if (objective.structure == Structure::Rand) {
        random_best = best.mean;
      } else {
        linguistic_sum += best.mean;
        ++linguistic_count;
      }
    }
    if (linguistic_count > 0 && random_best) {
      row.defined = true;
      row.avg_linguistic = linguistic_sum / linguistic_count;
      row.avg_random = *random_best;
      row.selectivity = row.avg_linguistic - row.avg_random;
    }
    report.selectivity[target] = row;
  }
  return report;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["layers"] = report.layers;
  j["seeds"] = report.seeds;
  nlohmann::json objectives = nlohmann::json::array();
  for (ObjectiveId objective : report.objectives) objectives.push_back(objective.name());
  j["objectives"] = objectives;
  nlohmann::json cells = nlohmann::json::array();
  for (const EvalCell& cell : report.cells) {
    nlohmann::json c;
    c["layer"] = cell.layer;
    c["objective"] = cell.objective.name();
    c["split"] = cell.train_split ? "train" : "test";
    c["n_seeds"] = cell.n_seeds_total;
    c["per_seed"] = cell.per_seed;
    if (cell.mean) {
      c["mean"] = *cell.mean;
      c["stddev"] = cell.stddev;
    } else {
      c["mean"] = nullptr;
      c["stddev"] = nullptr;
    }
    c["n_sentences"] = cell.n_sentences;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  nlohmann::json best;
  for (const auto& [objective, b] : report.best) {
    best[objective.name()] = {{"layer", b.layer}, {"mean", b.mean}, {"stddev", b.stddev}};
  }
  j["best"] = std::move(best);
  nlohmann::json selectivity;
  for (const auto& [target, row] : report.selectivity) {
    nlohmann::json r;
    if (row.defined) {
      r["avg_linguistic"] = row.avg_linguistic;
      r["avg_random"] = row.avg_random;
      r["selectivity"] = row.selectivity;
    } else {
      r["avg_linguistic"] = nullptr;
      r["avg_random"] = nullptr;
      r["selectivity"] = nullptr;
    }
    selectivity[std::string(target_name(target))] = std::move(r);
  }
  j["selectivity"] = std::move(selectivity);
  return j;
}

std::string report_to_tsv(const EvalReport& report) {
  std::ostringstream out;
  out << "layer\tobjective\tsplit\tn_seeds\tmean\tstddev\tn_sentences\n";
  for (const EvalCell& cell : report.cells) {
    out << cell.layer << '\t' << cell.objective.name() << '\t'
        << (cell.train_split ? "train" : "test") << '\t' << cell.n_seeds_total << '\t';
    if (cell.mean) {
      out << *cell.mean << '\t' << cell.stddev;
    } else {
      out << "NA\tNA";
    }
    out << '\t' << cell.n_sentences << '\n';
  }
  return out.str();
}

}  // namespace ortho
