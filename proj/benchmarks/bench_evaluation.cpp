#include <benchmark/benchmark.h>

#include "orthoprobe/evaluation.hpp"
#include "orthoprobe/rng.hpp"
#include "orthoprobe/treebank.hpp"

using namespace ortho;

namespace {

void BM_SpearmanTied(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto gen = rng::engine(5);
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = static_cast<double>(rng::uniform_below(gen, 16));
    b[i] = static_cast<double>(rng::uniform_below(gen, 16));
  }
  for (auto _ : state) benchmark::DoNotOptimize(spearman(a, b));
}
BENCHMARK(BM_SpearmanTied)->Arg(30)->Arg(300)->Arg(3000);

void BM_TreeExtraction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Matrix distances = random_tree(n, 9).distance_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(extract_undirected_tree(distances));
}
BENCHMARK(BM_TreeExtraction)->Arg(10)->Arg(30)->Arg(50);

}  // namespace
