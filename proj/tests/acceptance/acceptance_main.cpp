// Release gate for the probe toolkit. Each numbered check is self-contained,
// prints exactly one pass/fail line, and carries its own runtime budget; the
// process exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "orthoprobe/analysis.hpp"
#include "orthoprobe/dataset.hpp"
#include "orthoprobe/embeddings.hpp"
#include "orthoprobe/evaluation.hpp"
#include "orthoprobe/probe.hpp"
#include "orthoprobe/rng.hpp"
#include "orthoprobe/trainer.hpp"
#include "orthoprobe/treebank.hpp"

using namespace ortho;

namespace {

constexpr ObjectiveId kDepDepth{Structure::Dep, Target::Depth};
constexpr ObjectiveId kDepDist{Structure::Dep, Target::Distance};
constexpr ObjectiveId kPosDepth{Structure::Pos, Target::Depth};
constexpr ObjectiveId kPosDist{Structure::Pos, Target::Distance};
constexpr ObjectiveId kRandDepth{Structure::Rand, Target::Depth};
constexpr ObjectiveId kRandDist{Structure::Rand, Target::Distance};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double value) {
  std::ostringstream out;
  out.precision(4);
  out << value;
  return out.str();
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& gen) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng::gaussian(gen);
  return m;
}

AnnotatedSentence random_sentence(const std::string& id, int n, std::mt19937_64& gen) {
  const auto edges = random_tree_edges(n, gen);
  const int root = static_cast<int>(rng::uniform_below(gen, static_cast<std::uint64_t>(n)));
  const auto heads = RootedTree::from_edges(n, edges, root).heads();
  AnnotatedSentence sentence;
  sentence.id = id;
  for (int i = 0; i < n; ++i) {
    Token t;
    t.index = i + 1;
    t.form = "w" + std::to_string(i);
    t.lemma = t.form;
    t.upos = "NOUN";
    t.head = heads[i];
    sentence.tokens.push_back(std::move(t));
  }
  return sentence;
}

std::vector<AnnotatedSentence> random_treebank(int count, int min_len, int max_len,
                                               std::uint64_t seed) {
  auto gen = rng::engine(seed);
  std::vector<AnnotatedSentence> treebank;
  for (int s = 0; s < count; ++s) {
    const int n = min_len + static_cast<int>(rng::uniform_below(
                                gen, static_cast<std::uint64_t>(max_len - min_len + 1)));
    treebank.push_back(random_sentence("acc-" + std::to_string(s), n, gen));
  }
  return treebank;
}

// One split of a planted corpus; examples point into this struct's embedding
// storage, so splits are kept alive for the whole check.
struct SplitData {
  std::vector<AnnotatedSentence> treebank;
  EmbeddingSet embeddings;
  ObjectiveData data;
};

SplitData make_split(const std::vector<AnnotatedSentence>& all, const EmbeddingSet& full,
                     int begin, int count, const std::vector<ObjectiveId>& objectives,
                     const DatasetOptions& options) {
  SplitData split;
  split.treebank.assign(all.begin() + begin, all.begin() + begin + count);
  split.embeddings.layer = full.layer;
  split.embeddings.dim = full.dim;
  split.embeddings.sentences.assign(full.sentences.begin() + begin,
                                    full.sentences.begin() + begin + count);
  split.data = build_examples(split.treebank, split.embeddings, objectives, options);
  return split;
}

std::optional<double> score(const ProbeParams& params, ObjectiveId objective,
                            const std::vector<Example>& examples) {
  return evaluate_objective(params, objective, examples).mean;
}

// --- check 1: the rotated form reconstructed from an SVD matches the
// unconstrained linear probe on the same inputs ---
Outcome check_svd_equivalence() {
  auto gen = rng::engine(101);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 4 + static_cast<int>(rng::uniform_below(gen, 29));
    const Matrix b = random_matrix(dim, dim, gen);
    const Matrix h = random_matrix(6, dim, gen);
    const SvdResult svd = svd_decompose(b);

    const Matrix lin_dist = distance_forward_linear(b, h);
    const Matrix ortho_dist = distance_forward_orthogonal(svd.v, svd.singular_values, h);
    worst = std::max(worst, (lin_dist - ortho_dist).cwiseAbs().maxCoeff() /
                                lin_dist.cwiseAbs().maxCoeff());

    const Vector lin_depth = depth_forward_linear(b, h);
    const Vector ortho_depth = depth_forward_orthogonal(svd.v, svd.singular_values, h);
    worst = std::max(worst, (lin_depth - ortho_depth).cwiseAbs().maxCoeff() /
                                lin_depth.cwiseAbs().maxCoeff());
  }
  return {worst < 1e-6, "50 probes, dims 4-32, max relative error " + fmt(worst)};
}

// --- check 2: analytic gradients of the penalized losses against central
// finite differences ---
Outcome check_gradients() {
  Hyperparams hyper;
  hyper.lambda_o = 0.05;
  hyper.lambda_s = 0.05;
  const double h_step = 1e-5;
  const double rtol = 1e-4, atol = 1e-7;
  const int dim = 8;

  int checked = 0, failed = 0;
  double worst_gap = 0.0;
  for (int round = 0; round < 2; ++round) {
    for (Target target : {Target::Distance, Target::Depth}) {
      const ObjectiveId objective{Structure::Dep, target};
      auto gen = rng::engine(211 + round * 10 + static_cast<int>(target));
      OrthogonalProbeParams probe = init_orthogonal(dim, {objective}, 37 + round);
      probe.v += 0.05 * random_matrix(dim, dim, gen);
      for (int i = 0; i < dim; ++i) {
        probe.scalers[objective](i) = std::abs(rng::gaussian(gen)) + 0.1;
      }
      ProbeParams params(probe);

      const Matrix h1 = random_matrix(5, dim, gen);
      const Matrix h2 = random_matrix(3, dim, gen);
      GoldLabels g1 = random_tree_labels(5, 900 + round, target);
      g1.objective = objective;
      GoldLabels g2 = random_tree_labels(3, 901 + round, target);
      g2.objective = objective;
      const std::vector<SentenceRef> batch = {{&h1, &g1}, {&h2, &g2}};

      const GradientBundle grads = loss_gradients(params, hyper, batch, objective, true);
      auto loss_at = [&](const ProbeParams& p) {
        return total_loss(p, hyper, batch, objective, true).total;
      };
      auto probe_coord = [&](double* coord, double analytic) {
        const double saved = *coord;
        *coord = saved + h_step;
        const double up = loss_at(params);
        *coord = saved - h_step;
        const double down = loss_at(params);
        *coord = saved;
        const double fd = (up - down) / (2 * h_step);
        const double gap = std::abs(analytic - fd);
        worst_gap = std::max(worst_gap, gap);
        ++checked;
        if (gap > atol + rtol * std::abs(fd)) ++failed;
      };

      auto& live = std::get<OrthogonalProbeParams>(params);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) probe_coord(&live.v(i, j), grads.grad_v(i, j));
      for (int i = 0; i < dim; ++i)
        probe_coord(&live.scalers[objective](i), grads.grad_d.at(objective)(i));
    }
  }
  return {checked >= 200 && failed == 0,
          std::to_string(checked) + " coordinates, " + std::to_string(failed) +
              " over tolerance, worst gap " + fmt(worst_gap)};
}

// --- check 3: on planted data the rotation is driven (back) onto the
// orthogonal manifold within 20 epochs, from a start far away from it ---
Outcome check_dso_convergence() {
  const std::vector<ObjectiveId> objectives = {kDepDepth, kDepDist};
  const auto treebank = random_treebank(168, 5, 10, 301);
  PlantedSpec spec;
  spec.ambient_dim = 32;
  spec.planted_structure = kDepDist;
  spec.noise_scale = 0.02;
  spec.rotation_seed = 302;
  const EmbeddingSet embeddings = synthesize_planted(treebank, spec);

  DatasetOptions options;
  const SplitData train_split = make_split(treebank, embeddings, 0, 144, objectives, options);
  const SplitData val_split = make_split(treebank, embeddings, 144, 24, objectives, options);

  TrainConfig config;
  config.mode = Mode::B;
  config.objectives = objectives;
  config.seed = 303;
  config.max_epochs = 20;
  config.patience_updates = 20;  // use the whole epoch budget
  OrthogonalProbeParams start = init_orthogonal(32, objectives, 304);
  start.v *= 2.0;  // dso is several hundred here
  config.initial_params = ProbeParams(start);

  const TrainResult result = train(config, train_split.data, val_split.data);
  double best_dso = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const EpochRecord& record : result.history) {
    if (record.dso < best_dso) {
      best_dso = record.dso;
      best_epoch = record.epoch;
    }
  }
  return {best_dso < 0.05, "start dso " + fmt(dso_penalty(start.v)) + ", reached " +
                               fmt(best_dso) + " at epoch " + std::to_string(best_epoch)};
}

// Shared corpus for checks 4 and 6: dependency trees planted in a 64-dim
// ambient space, 300/40/50 train/val/test sentences of length 5-20.
struct RecoveryRun {
  std::optional<double> depth_rho, dist_rho;
  std::optional<double> depth_masked, dist_masked;
  int depth_selected = 0, dist_selected = 0;
  int epochs = 0;
};

RecoveryRun planted_recovery(double lambda_s) {
  const std::vector<ObjectiveId> objectives = {kDepDepth, kDepDist};
  const auto treebank = random_treebank(390, 5, 20, 401);
  PlantedSpec spec;
  spec.ambient_dim = 64;
  spec.planted_structure = kDepDist;
  spec.noise_scale = 0.1;
  spec.rotation_seed = 402;
  const EmbeddingSet embeddings = synthesize_planted(treebank, spec);

  DatasetOptions options;
  const SplitData train_split = make_split(treebank, embeddings, 0, 300, objectives, options);
  const SplitData val_split = make_split(treebank, embeddings, 300, 40, objectives, options);
  const SplitData test_split = make_split(treebank, embeddings, 340, 50, objectives, options);

  TrainConfig config;
  config.mode = Mode::B;
  config.objectives = objectives;
  config.seed = 403;
  config.max_epochs = 60;
  config.patience_updates = 8;
  config.hyper.lambda_s = lambda_s;
  // Start off the orthogonal manifold so the sparsity latch engages only
  // after the data fit has taken hold.
  OrthogonalProbeParams start = init_orthogonal(64, objectives, 404);
  start.v *= 2.0;
  config.initial_params = ProbeParams(start);
  const TrainResult result = train(config, train_split.data, val_split.data);

  RecoveryRun run;
  run.epochs = static_cast<int>(result.history.size());
  run.depth_rho = score(result.best_params, kDepDepth, test_split.data.at(kDepDepth));
  run.dist_rho = score(result.best_params, kDepDist, test_split.data.at(kDepDist));

  const auto& probe = std::get<OrthogonalProbeParams>(result.best_params);
  const DimSelection depth_sel = select_dimensions(probe.scalers.at(kDepDepth), kDepDepth, 1e-4);
  const DimSelection dist_sel = select_dimensions(probe.scalers.at(kDepDist), kDepDist, 1e-4);
  run.depth_selected = static_cast<int>(depth_sel.selected.size());
  run.dist_selected = static_cast<int>(dist_sel.selected.size());
  run.depth_masked =
      masked_evaluate(probe, kDepDepth, depth_sel.selected, test_split.data.at(kDepDepth)).mean;
  run.dist_masked =
      masked_evaluate(probe, kDepDist, dist_sel.selected, test_split.data.at(kDepDist)).mean;
  return run;
}

Outcome check_planted_recovery(const RecoveryRun& run) {
  if (!run.depth_rho || !run.dist_rho || !run.depth_masked || !run.dist_masked) {
    return {false, "a correlation came back undefined"};
  }
  const bool rho_ok = *run.depth_rho >= 0.90 && *run.dist_rho >= 0.90;
  const bool count_ok = run.depth_selected <= 32 && run.dist_selected <= 32;
  const bool mask_ok = std::abs(*run.depth_rho - *run.depth_masked) <= 0.01 &&
                       std::abs(*run.dist_rho - *run.dist_masked) <= 0.01;
  return {rho_ok && count_ok && mask_ok,
          "held-out depth rho " + fmt(*run.depth_rho) + ", distance rho " + fmt(*run.dist_rho) +
              ", selected " + std::to_string(run.depth_selected) + "/" +
              std::to_string(run.dist_selected) + " dims, masked deltas " +
              fmt(std::abs(*run.depth_rho - *run.depth_masked)) + "/" +
              fmt(std::abs(*run.dist_rho - *run.dist_masked)) + ", " +
              std::to_string(run.epochs) + " epochs"};
}

Outcome check_sparsity_effect(const RecoveryRun& sparse, const RecoveryRun& plain) {
  if (!sparse.depth_rho || !plain.depth_rho || !sparse.dist_rho || !plain.dist_rho) {
    return {false, "a correlation came back undefined"};
  }
  const bool fewer = sparse.depth_selected < plain.depth_selected &&
                     sparse.dist_selected < plain.dist_selected;
  const bool close = *sparse.depth_rho >= *plain.depth_rho - 0.05 &&
                     *sparse.dist_rho >= *plain.dist_rho - 0.05;
  return {fewer && close,
          "selected " + std::to_string(sparse.depth_selected) + "/" +
              std::to_string(sparse.dist_selected) + " dims with the penalty vs " +
              std::to_string(plain.depth_selected) + "/" + std::to_string(plain.dist_selected) +
              " without, rho deltas " + fmt(*plain.depth_rho - *sparse.depth_rho) + "/" +
              fmt(*plain.dist_rho - *sparse.dist_rho)};
}

// --- check 5: with a constrained probe, random target trees are memorized no
// better than the unconstrained baseline under the same epoch budget ---
Outcome check_memorization() {
  const std::vector<ObjectiveId> objectives = {kRandDepth, kRandDist};
  const auto treebank = random_treebank(120, 5, 12, 501);
  PlantedSpec spec;
  spec.ambient_dim = 32;
  spec.planted_structure = kDepDist;  // embeddings encode syntax, not the random trees
  spec.noise_scale = 0.1;
  spec.rotation_seed = 502;
  const EmbeddingSet embeddings = synthesize_planted(treebank, spec);

  DatasetOptions options;
  options.data_seed = 503;
  const SplitData train_split = make_split(treebank, embeddings, 0, 100, objectives, options);
  const SplitData val_split = make_split(treebank, embeddings, 100, 20, objectives, options);

  TrainConfig base;
  base.objectives = objectives;
  base.seed = 504;
  base.max_epochs = 15;
  base.patience_updates = 1000;  // both runs use the full epoch budget

  TrainConfig ortho_config = base;
  ortho_config.mode = Mode::B;
  const TrainResult ortho_run = train(ortho_config, train_split.data, val_split.data);

  TrainConfig linear_config = base;
  linear_config.mode = Mode::II;
  const TrainResult linear_run = train(linear_config, train_split.data, val_split.data);

  const auto ortho_depth = score(ortho_run.final_params, kRandDepth, train_split.data.at(kRandDepth));
  const auto ortho_dist = score(ortho_run.final_params, kRandDist, train_split.data.at(kRandDist));
  const auto linear_depth =
      score(linear_run.final_params, kRandDepth, train_split.data.at(kRandDepth));
  const auto linear_dist = score(linear_run.final_params, kRandDist, train_split.data.at(kRandDist));
  if (!ortho_depth || !ortho_dist || !linear_depth || !linear_dist) {
    return {false, "a correlation came back undefined"};
  }
  const bool ok = *ortho_depth <= *linear_depth + 0.02 && *ortho_dist <= *linear_dist + 0.02;
  return {ok, "train rho on random trees, constrained vs baseline: depth " + fmt(*ortho_depth) +
                  " vs " + fmt(*linear_depth) + ", distance " + fmt(*ortho_dist) + " vs " +
                  fmt(*linear_dist)};
}

// --- check 7: gold tree metrics round-trip through extraction ---
Outcome check_tree_extraction() {
  auto gen = rng::engine(701);
  int perfect_uuas = 0, perfect_uas = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + static_cast<int>(rng::uniform_below(gen, 29));
    const RootedTree tree = random_tree(n, 7000 + trial);
    const Matrix distances = tree.distance_matrix();
    Vector depths(n);
    for (int i = 0; i < n; ++i) depths(i) = tree.depth[i];

    if (uuas(extract_undirected_tree(distances), tree) == 1.0) ++perfect_uuas;
    if (uas(extract_directed_tree(distances, depths), tree) == 1.0) ++perfect_uas;
  }
  return {perfect_uuas == trials && perfect_uas == trials,
          std::to_string(perfect_uuas) + "/100 perfect UUAS, " + std::to_string(perfect_uas) +
              "/100 perfect UAS on gold metrics"};
}

// --- check 8: rank correlation against a quadratic counting oracle ---
Outcome check_spearman_oracle() {
  auto counted_ranks = [](const std::vector<double>& x) {
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      int less = 0, equal = 0;
      for (double v : x) {
        if (v < x[i]) ++less;
        if (v == x[i]) ++equal;
      }
      ranks[i] = 1.0 + less + (equal - 1) / 2.0;
    }
    return ranks;
  };
  auto pearson = [](const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ma += a[i];
      mb += b[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num += (a[i] - ma) * (b[i] - mb);
      sa += (a[i] - ma) * (a[i] - ma);
      sb += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(sa * sb);
  };

  auto gen = rng::engine(801);
  int compared = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + static_cast<int>(rng::uniform_below(gen, 58));
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng::uniform_below(gen, 9));
      b[i] = static_cast<double>(rng::uniform_below(gen, 7));
    }
    const auto got = spearman(a, b);
    const auto ra = counted_ranks(a);
    const auto rb = counted_ranks(b);
    const bool a_const = std::all_of(ra.begin(), ra.end(), [&](double r) { return r == ra[0]; });
    const bool b_const = std::all_of(rb.begin(), rb.end(), [&](double r) { return r == rb[0]; });
    if (a_const || b_const) {
      if (got.has_value()) return {false, "defined result on a constant input"};
      continue;
    }
    if (!got.has_value()) return {false, "undefined result on a usable input"};
    worst = std::max(worst, std::abs(*got - pearson(ra, rb)));
    ++compared;
  }
  return {worst < 1e-12 && compared > 900,
          std::to_string(compared) + " tied inputs, max deviation " + fmt(worst)};
}

// --- check 9: closed-form parameter and freedom counts at dim 1024, 8
// scaling vectors ---
Outcome check_counting() {
  const std::int64_t params = parameter_count(1024, 8);
  const std::int64_t freedom = degrees_of_freedom(1024, 8);
  const bool params_ok = params == 1056768;
  const bool freedom_ok = freedom == 523766;
  std::string detail = "parameter_count(1024, 8) = " + std::to_string(params) +
                       ", expected 1056768; degrees_of_freedom(1024, 8) = " +
                       std::to_string(freedom) + ", expected 523766";
  return {params_ok && freedom_ok, detail};
}

// --- check 10: the n=4 tree sampler is uniform over all 16 labeled trees ---
Outcome check_tree_uniformity() {
  auto gen = rng::engine(1001);
  const int draws = 16000;
  std::map<std::vector<std::pair<int, int>>, int> counts;
  for (int draw = 0; draw < draws; ++draw) {
    auto edges = random_tree_edges(4, gen);
    for (auto& [a, b] : edges) {
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    ++counts[edges];
  }
  const double expected = draws / 16.0;
  double chi2 = 0.0;
  for (const auto& [edges, observed] : counts) {
    chi2 += (observed - expected) * (observed - expected) / expected;
  }
  // 1% critical value of a chi-square with 15 degrees of freedom
  const double threshold = 30.578;
  return {counts.size() == 16 && chi2 < threshold,
          std::to_string(counts.size()) + " distinct trees, chi^2 " + fmt(chi2) +
              " (threshold " + fmt(threshold) + ")"};
}

// --- check 11: structures planted in orthogonal subspaces stay in separate
// coordinate sets after joint training over all objectives ---
Outcome check_subspace_separation() {
  const std::vector<ObjectiveId> objectives = {
      {Structure::Dep, Target::Depth},  {Structure::Dep, Target::Distance},
      {Structure::Lex, Target::Depth},  {Structure::Lex, Target::Distance},
      {Structure::Pos, Target::Depth},  {Structure::Pos, Target::Distance},
      {Structure::Rand, Target::Depth}, {Structure::Rand, Target::Distance}};

  const char* taxonomy_text =
      "E\tanimal\tanimal\n"
      "E\tcanine\tanimal\n"
      "E\tdog\tcanine\n"
      "E\twolf\tcanine\n"
      "E\tcat\tanimal\n"
      "E\tact\tact\n"
      "E\tmotion\tact\n"
      "E\trun\tmotion\n"
      "E\twalk\tmotion\n"
      "L\tdog\tNOUN\tdog\n"
      "L\twolf\tNOUN\twolf\n"
      "L\tcat\tNOUN\tcat\n"
      "L\tanimal\tNOUN\tanimal\n"
      "L\trun\tVERB\trun\n"
      "L\twalk\tVERB\twalk\n";
  std::istringstream taxonomy_in(taxonomy_text);
  const Taxonomy taxonomy = Taxonomy::load(taxonomy_in);

  const char* lemmas[] = {"dog", "wolf", "cat", "animal", "run", "walk", "the"};
  const char* upos[] = {"NOUN", "NOUN", "NOUN", "NOUN", "VERB", "VERB", "DET"};
  auto gen = rng::engine(1101);
  std::vector<AnnotatedSentence> treebank;
  for (int s = 0; s < 500; ++s) {
    const int n = 5 + static_cast<int>(rng::uniform_below(gen, 5));
    AnnotatedSentence sentence = random_sentence("sep-" + std::to_string(s), n, gen);
    for (Token& t : sentence.tokens) {
      const auto pick = rng::uniform_below(gen, 7);
      t.lemma = lemmas[pick];
      t.form = t.lemma;
      t.upos = upos[pick];
    }
    treebank.push_back(std::move(sentence));
  }

  const EmbeddingSet embeddings = synthesize_planted_blocks(
      treebank, 24, {Structure::Dep, Structure::Pos}, 0.1, 1102, 1103, 0);

  DatasetOptions options;
  options.data_seed = 1103;
  options.taxonomy = &taxonomy;
  const SplitData train_split = make_split(treebank, embeddings, 0, 480, objectives, options);
  const SplitData val_split = make_split(treebank, embeddings, 480, 20, objectives, options);

  TrainConfig config;
  config.mode = Mode::E;
  config.objectives = objectives;
  config.seed = 1104;
  config.max_epochs = 100;
  config.patience_updates = 8;
  config.hyper.lambda_s = 0.05;
  OrthogonalProbeParams start = init_orthogonal(24, objectives, 1105);
  start.v *= 2.0;
  config.initial_params = ProbeParams(start);
  const TrainResult result = train(config, train_split.data, val_split.data);

  // Trained scaling vectors are near-binary on this data: dimensions a probe
  // relies on sit near 1, the rest at least a factor of five lower. The cut
  // sits inside that gap, so the selections are stable over a wide epsilon
  // range.
  const double epsilon = 0.25;
  const auto& probe = std::get<OrthogonalProbeParams>(result.best_params);
  std::map<ObjectiveId, DimSelection> selections;
  for (ObjectiveId objective : objectives) {
    selections.emplace(objective,
                       select_dimensions(probe.scalers.at(objective), objective, epsilon));
  }

  const std::vector<ObjectiveId> dep_side = {kDepDepth, kDepDist};
  const std::vector<ObjectiveId> pos_side = {kPosDepth, kPosDist};
  int worst_overlap = 0;
  int smallest_diag = std::numeric_limits<int>::max();
  bool ok = true;
  for (ObjectiveId a : dep_side) {
    for (ObjectiveId b : pos_side) {
      const auto& sa = selections.at(a).selected;
      const auto& sb = selections.at(b).selected;
      std::vector<int> shared;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::back_inserter(shared));
      const int diag = static_cast<int>(std::min(sa.size(), sb.size()));
      if (diag == 0) ok = false;
      smallest_diag = std::min(smallest_diag, diag);
      worst_overlap = std::max(worst_overlap, static_cast<int>(shared.size()));
      if (static_cast<double>(shared.size()) > 0.10 * diag) ok = false;
    }
  }
  return {ok, "largest cross-structure overlap " + std::to_string(worst_overlap) +
                  " dims, smallest selection " + std::to_string(smallest_diag) + " dims"};
}

int report(int id, const Outcome& outcome, double seconds, double budget) {
  const bool in_time = seconds < budget;
  const bool pass = outcome.pass && in_time;
  std::cout << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << " (" << outcome.detail
            << ", " << fmt(seconds) << "s";
  if (!in_time) std::cout << ", over the " << fmt(budget) << "s budget";
  std::cout << ")\n";
  return pass ? 0 : 1;
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;

  auto timed = [&](int id, double budget, auto&& check) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    failures += report(id, outcome, seconds, budget);
  };

  timed(1, 5.0, check_svd_equivalence);
  timed(2, 10.0, check_gradients);
  timed(3, 60.0, check_dso_convergence);

  // Checks 4 and 6 share the penalized recovery run; 6 adds the rerun without
  // the sparsity penalty.
  std::optional<RecoveryRun> sparse;
  timed(4, 300.0, [&] {
    sparse = planted_recovery(0.05);
    return check_planted_recovery(*sparse);
  });
  timed(5, 180.0, check_memorization);
  timed(6, 300.0, [&]() -> Outcome {
    if (!sparse) return {false, "skipped: the shared run from criterion 4 threw"};
    return check_sparsity_effect(*sparse, planted_recovery(0.0));
  });
  timed(7, 2.0, check_tree_extraction);
  timed(8, 2.0, check_spearman_oracle);
  timed(9, 60.0, check_counting);
  timed(10, 2.0, check_tree_uniformity);
  timed(11, 300.0, check_subspace_separation);

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
