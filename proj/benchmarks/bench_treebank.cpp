#include <sstream>

#include <benchmark/benchmark.h>

#include "orthoprobe/rng.hpp"
#include "orthoprobe/treebank.hpp"

using namespace ortho;

namespace {

std::string synthetic_conllu(int sentences, int tokens) {
  std::ostringstream out;
  for (int s = 0; s < sentences; ++s) {
    out << "# sent_id = bench-" << s + 1 << "\n";
    const std::vector<int> heads = random_tree(tokens, 40 + s).heads();
    for (int i = 0; i < tokens; ++i) {
      out << i + 1 << "\tw\tw\tNOUN\t_\t_\t" << heads[i] << "\t"
          << (heads[i] == 0 ? "root" : "dep") << "\t_\t_\n";
    }
    out << "\n";
  }
  return out.str();
}

void BM_ParseConllu(benchmark::State& state) {
  const std::string text = synthetic_conllu(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(parse_conllu(in));
  }
}
BENCHMARK(BM_ParseConllu)->Arg(10)->Arg(100);

void BM_RandomTree(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(random_tree(n, ++seed));
}
BENCHMARK(BM_RandomTree)->Arg(10)->Arg(50);

}  // namespace
