#include <benchmark/benchmark.h>

#include "orthoprobe/probe.hpp"
#include "orthoprobe/rng.hpp"
#include "orthoprobe/treebank.hpp"

using namespace ortho;

namespace {

constexpr ObjectiveId kObjective{Structure::Dep, Target::Distance};

struct Fixture {
  OrthogonalProbeParams params;
  std::vector<Matrix> embeddings;
  std::vector<GoldLabels> gold;
  std::vector<SentenceRef> batch;

  Fixture(int dim, int tokens, int sentences) {
    params = init_orthogonal(dim, {kObjective}, 1);
    auto gen = rng::engine(2);
    for (int s = 0; s < sentences; ++s) {
      Matrix h(tokens, dim);
      for (int i = 0; i < tokens; ++i)
        for (int j = 0; j < dim; ++j) h(i, j) = rng::gaussian(gen);
      embeddings.push_back(std::move(h));
      gold.push_back(random_tree_labels(tokens, 10 + s, Target::Distance));
      gold.back().objective = kObjective;
    }
    for (int s = 0; s < sentences; ++s) batch.push_back({&embeddings[s], &gold[s]});
  }
};

void BM_DistanceForward(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 20, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_distances(f.params, kObjective, f.embeddings[0]));
  }
}
BENCHMARK(BM_DistanceForward)->Arg(64)->Arg(256)->Arg(1024);

void BM_BatchLossAndGradients(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)), 20, 12);
  const Hyperparams hyper;
  const ProbeParams params(f.params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_gradients(params, hyper, f.batch, kObjective, true));
  }
}
BENCHMARK(BM_BatchLossAndGradients)->Arg(64)->Arg(256);

}  // namespace
