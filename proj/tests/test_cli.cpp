#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "orthoprobe/checkpoint.hpp"
#include "orthoprobe/embeddings.hpp"
#include "orthoprobe/treebank.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ortho;

namespace {

std::string binary() {
  const char* bin = std::getenv("ORTHOPROBE_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ORTHOPROBE_BIN must point at the orthoprobe binary");
  return bin;
}

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& args, const fs::path& cwd) {
  static int counter = 0;
  const fs::path capture =
      fs::temp_directory_path() / ("orthoprobe-cli-" + std::to_string(++counter) + ".log");
  const std::string command = "cd '" + cwd.string() + "' && '" + binary() + "' " + args + " > '" +
                              capture.string() + "' 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  fs::remove(capture);
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file " + path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string conllu_sentence(const std::string& id, const std::vector<int>& heads) {
  std::ostringstream out;
  out << "# sent_id = " << id << "\n";
  for (std::size_t i = 0; i < heads.size(); ++i) {
    out << (i + 1) << "\tw" << (i + 1) << "\tw" << (i + 1) << "\tNOUN\t_\t_\t" << heads[i]
        << "\t" << (heads[i] == 0 ? "root" : "dep") << "\t_\t_\n";
  }
  out << "\n";
  return out.str();
}

// Path-indicator embedding of the sentence tree: one coordinate per non-root
// token, set along the root path. Squared point distances then equal tree
// distances and squared norms equal depths, so an identity probe is exact.
Matrix indicator_embedding(const std::vector<int>& heads, int dim) {
  const RootedTree tree = RootedTree::from_heads(heads);
  const int n = tree.size();
  std::vector<int> column(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (i != tree.root) column[i] = next++;
  }
  Matrix h = Matrix::Zero(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int node = i; node != tree.root; node = tree.parent[node]) h(i, column[node]) = 1.0;
  }
  return h;
}

void write_embedding_file(const fs::path& path, const std::vector<std::vector<int>>& head_lists,
                          int dim) {
  EmbeddingSet set;
  set.layer = 0;
  set.dim = dim;
  for (const auto& heads : head_lists) set.sentences.push_back(indicator_embedding(heads, dim));
  std::ostringstream out;
  write_embeddings(set, out);
  spit(path, out.str());
}

const std::vector<std::vector<int>> kTrainTrees = {
    {0, 1, 2, 3, 4},     // chain of five
    {0, 1, 1, 1, 1},     // star
    {0, 1, 1, 3, 3, 1},  // branching, six tokens
};
const std::vector<std::vector<int>> kDevTrees = {{0, 1, 2, 3, 4}};
const std::vector<std::vector<int>> kTestTrees = {
    {0, 1, 2, 3, 4, 5},  // chain of six
    {0, 1, 1, 3, 3},     // two levels
};

// Hand-planted fixture: treebanks plus exact indicator embeddings and an
// identity checkpoint, so every prediction matches gold to the last bit.
fs::path build_exact_fixture(const std::string& name,
                             const std::vector<ObjectiveId>& objectives,
                             const std::string& objective_json) {
  const fs::path dir = fresh_dir(name);
  const int dim = 5;

  auto write_split = [&](const char* split, const std::vector<std::vector<int>>& trees) {
    std::string text;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      text += conllu_sentence(std::string(split) + "-" + std::to_string(i + 1), trees[i]);
    }
    spit(dir / "data" / (std::string(split) + ".conllu"), text);
    write_embedding_file(dir / "emb" / (std::string(split) + "_layer0.opemb"), trees, dim);
  };
  write_split("train", kTrainTrees);
  write_split("dev", kDevTrees);
  write_split("test", kTestTrees);

  OrthogonalProbeParams params;
  params.v = Matrix::Identity(dim, dim);
  for (ObjectiveId objective : objectives) params.scalers[objective] = Vector::Ones(dim);
  save_checkpoint_file({Mode::B, ProbeParams(params)},
                       dir / "out" / "checkpoints" / "layer0_seed0.opckp");

  spit(dir / "config.json", R"({
  "treebank": {"train": "data/train.conllu", "dev": "data/dev.conllu", "test": "data/test.conllu"},
  "embeddings": "emb/{split}_layer{layer}.opemb",
  "mode": "B",
  "objectives": )" + objective_json + R"(,
  "layers": [0],
  "seeds": [0],
  "data_seed": 11,
  "output_dir": "out"
}
)");
  return dir;
}

const char* kSynthConfig = R"({
  "treebank": {"train": "out/treebank/train.conllu", "dev": "out/treebank/dev.conllu", "test": "out/treebank/test.conllu"},
  "embeddings": "out/embeddings/{split}_layer{layer}.opemb",
  "taxonomy": "out/taxonomy.tsv",
  "mode": "B",
  "objectives": ["dep_depth", "dep_distance"],
  "layers": [0],
  "seeds": [0],
  "data_seed": 7,
  "output_dir": "out",
  "max_epochs": 4,
  "synth": {"train_sentences": 30, "dev_sentences": 8, "test_sentences": 8,
            "min_length": 5, "max_length": 9, "ambient_dim": 16,
            "structures": ["dep"], "noise_scale": 0.05, "rotation_seed": 3}
}
)";

}  // namespace

TEST_CASE("synth, train, eval and analyze chain through one config") {
  const fs::path dir = fresh_dir("orthoprobe-cli-pipeline");
  spit(dir / "config.json", kSynthConfig);

  const RunResult synth = run("synth --config config.json", dir);
  CHECK_MESSAGE(synth.code == 0, synth.output);
  CHECK(synth.output.find("wrote") != std::string::npos);
  for (const char* path : {"out/treebank/train.conllu", "out/treebank/dev.conllu",
                           "out/treebank/test.conllu", "out/taxonomy.tsv",
                           "out/embeddings/train_layer0.opemb",
                           "out/embeddings/dev_layer0.opemb",
                           "out/embeddings/test_layer0.opemb"}) {
    CHECK_MESSAGE(fs::exists(dir / path), path);
  }

  const std::string embedding_bytes = slurp(dir / "out/embeddings/test_layer0.opemb");
  const std::string treebank_bytes = slurp(dir / "out/treebank/train.conllu");
  CHECK(run("synth --config config.json", dir).code == 0);
  CHECK(slurp(dir / "out/embeddings/test_layer0.opemb") == embedding_bytes);
  CHECK(slurp(dir / "out/treebank/train.conllu") == treebank_bytes);

  const RunResult train = run("train --config config.json", dir);
  CHECK_MESSAGE(train.code == 0, train.output);
  CHECK(train.output.find("best epoch") != std::string::npos);
  CHECK(fs::exists(dir / "out/checkpoints/layer0_seed0.opckp"));
  CHECK(fs::exists(dir / "out/history/layer0_seed0.json"));

  const RunResult skip = run("train --config config.json", dir);
  CHECK(skip.code == 0);
  CHECK(skip.output.find("already trained, skipped") != std::string::npos);

  const std::string checkpoint_bytes = slurp(dir / "out/checkpoints/layer0_seed0.opckp");
  const RunResult redo = run("train --config config.json --force", dir);
  CHECK_MESSAGE(redo.code == 0, redo.output);
  CHECK(slurp(dir / "out/checkpoints/layer0_seed0.opckp") == checkpoint_bytes);

  const RunResult eval = run("eval --config config.json", dir);
  CHECK_MESSAGE(eval.code == 0, eval.output);
  const json report = json::parse(slurp(dir / "out/eval/report.json"));
  REQUIRE(report["cells"].size() == 2);
  for (const auto& cell : report["cells"]) {
    REQUIRE_FALSE(cell["mean"].is_null());
    const double mean = cell["mean"].get<double>();
    CHECK(mean >= -1.0);
    CHECK(mean <= 1.0);
  }
  REQUIRE(report["parse"].size() == 1);
  CHECK(report["parse"][0]["n_edges"].get<int>() > 0);
  CHECK(fs::exists(dir / "out/eval/report.tsv"));
  CHECK(fs::exists(dir / "out/eval/parse.tsv"));

  const std::string report_bytes = slurp(dir / "out/eval/report.json");
  CHECK(run("eval --config config.json", dir).code == 0);
  CHECK(slurp(dir / "out/eval/report.json") == report_bytes);

  const RunResult analyze = run("analyze --config config.json --overlap --epsilon-sweep", dir);
  CHECK_MESSAGE(analyze.code == 0, analyze.output);
  const fs::path run_dir = dir / "out/analysis/layer0_seed0";
  for (const char* name : {"dims.tsv", "overlap.tsv", "histogram.tsv", "epsilon_sweep.tsv"}) {
    CHECK_MESSAGE(fs::exists(run_dir / name), name);
  }
  const std::string dims = slurp(run_dir / "dims.tsv");
  CHECK(dims.rfind("objective\tn_selected", 0) == 0);
  CHECK(dims.find("dep_depth") != std::string::npos);
  CHECK(dims.find("dep_distance") != std::string::npos);
}

TEST_CASE("hand-planted embeddings evaluate to exact ones") {
  const ObjectiveId dist{Structure::Dep, Target::Distance};
  const ObjectiveId depth{Structure::Dep, Target::Depth};
  const fs::path dir = build_exact_fixture("orthoprobe-cli-exact", {dist, depth},
                                           R"(["dep_depth", "dep_distance"])");

  const RunResult eval = run("eval --config config.json", dir);
  CHECK_MESSAGE(eval.code == 0, eval.output);
  const json report = json::parse(slurp(dir / "out/eval/report.json"));
  REQUIRE(report["cells"].size() == 2);
  for (const auto& cell : report["cells"]) {
    CHECK(cell["mean"].get<double>() == 1.0);
    CHECK(cell["stddev"].get<double>() == 0.0);
    CHECK(cell["split"].get<std::string>() == "test");
  }
  REQUIRE(report["parse"].size() == 1);
  CHECK(report["parse"][0]["uuas"].get<double>() == 1.0);
  CHECK(report["parse"][0]["uas"].get<double>() == 1.0);
  CHECK(report["parse"][0]["n_edges"].get<int>() == 9);   // 5 + 4 gold edges
  CHECK(report["parse"][0]["n_tokens"].get<int>() == 11);  // 6 + 5 tokens

  const RunResult analyze = run("analyze --config config.json", dir);
  CHECK_MESSAGE(analyze.code == 0, analyze.output);
  const std::string dims = slurp(dir / "out/analysis/layer0_seed0/dims.tsv");
  CHECK(dims.find("dep_depth\t5\t1\t1") != std::string::npos);
  CHECK(dims.find("dep_distance\t5\t1\t1") != std::string::npos);
}

TEST_CASE("random objectives score on the training split") {
  const ObjectiveId rand_dist{Structure::Rand, Target::Distance};
  const ObjectiveId rand_depth{Structure::Rand, Target::Depth};
  const fs::path dir = build_exact_fixture("orthoprobe-cli-rand", {rand_dist, rand_depth},
                                           R"(["rand_depth", "rand_distance"])");

  const RunResult eval = run("eval --config config.json", dir);
  CHECK_MESSAGE(eval.code == 0, eval.output);
  const json report = json::parse(slurp(dir / "out/eval/report.json"));
  REQUIRE(report["cells"].size() == 2);
  for (const auto& cell : report["cells"]) {
    CHECK(cell["split"].get<std::string>() == "train");
  }
  const std::string tsv = slurp(dir / "out/eval/report.tsv");
  CHECK(tsv.find("\ttrain\t") != std::string::npos);
}

TEST_CASE("config problems exit with code 2") {
  const fs::path dir = fresh_dir("orthoprobe-cli-config-errors");

  spit(dir / "unknown.json", R"({"mode": "A", "layers": [0], "seeds": [0], "bogus_key": 1})");
  const RunResult unknown = run("eval --config unknown.json", dir);
  CHECK(unknown.code == 2);
  CHECK(unknown.output.find("unknown key 'bogus_key'") != std::string::npos);

  spit(dir / "missing-mode.json", R"({"layers": [0], "seeds": [0]})");
  const RunResult missing = run("eval --config missing-mode.json", dir);
  CHECK(missing.code == 2);
  CHECK(missing.output.find("mode: missing") != std::string::npos);

  spit(dir / "bad-combo.json",
       R"({"mode": "A", "objectives": ["dep_depth", "dep_distance"], "layers": [0], "seeds": [0], "output_dir": "out"})");
  const RunResult combo = run("eval --config bad-combo.json", dir);
  CHECK(combo.code == 2);
  CHECK(combo.output.find("mode A") != std::string::npos);

  spit(dir / "mode-a.json",
       R"({"mode": "A", "objectives": ["dep_depth"], "layers": [0], "seeds": [0], "output_dir": "out"})");
  const RunResult overlap = run("analyze --config mode-a.json --overlap", dir);
  CHECK(overlap.code == 2);
  CHECK(overlap.output.find("overlap table requires a shared rotation") != std::string::npos);

  spit(dir / "linear.json",
       R"({"mode": "II", "objectives": ["dep_depth"], "layers": [0], "seeds": [0], "output_dir": "out"})");
  const RunResult linear = run("analyze --config linear.json", dir);
  CHECK(linear.code == 2);
  CHECK(linear.output.find("no scaling vectors") != std::string::npos);
}

TEST_CASE("a missing checkpoint is reported as missing data") {
  const ObjectiveId dist{Structure::Dep, Target::Distance};
  const ObjectiveId depth{Structure::Dep, Target::Depth};
  const fs::path dir = build_exact_fixture("orthoprobe-cli-nockpt", {dist, depth},
                                           R"(["dep_depth", "dep_distance"])");
  const RunResult eval = run("eval --config config.json --output-dir out_missing", dir);
  CHECK(eval.code == 3);
  CHECK(eval.output.find("cannot open checkpoint") != std::string::npos);
}

TEST_CASE("a mode flag that contradicts the checkpoint is refused") {
  const ObjectiveId dist{Structure::Dep, Target::Distance};
  const ObjectiveId depth{Structure::Dep, Target::Depth};
  const fs::path dir = build_exact_fixture("orthoprobe-cli-mismatch", {dist, depth},
                                           R"(["dep_depth", "dep_distance"])");
  const RunResult eval = run("eval --config config.json --mode II", dir);
  CHECK(eval.code == 2);
  CHECK(eval.output.find("was trained in mode B") != std::string::npos);
}

TEST_CASE("inspect-conllu prints a treebank summary") {
  const ObjectiveId dist{Structure::Dep, Target::Distance};
  const ObjectiveId depth{Structure::Dep, Target::Depth};
  const fs::path dir = build_exact_fixture("orthoprobe-cli-inspect", {dist, depth},
                                           R"(["dep_depth", "dep_distance"])");
  const RunResult inspect = run("inspect-conllu data/train.conllu", dir);
  CHECK_MESSAGE(inspect.code == 0, inspect.output);
  CHECK(inspect.output.find("sentences\t3") != std::string::npos);
  CHECK(inspect.output.find("tokens\t16") != std::string::npos);
  CHECK(inspect.output.find("upos\tNOUN\t16") != std::string::npos);

  const RunResult absent = run("inspect-conllu nothing-here.conllu", dir);
  CHECK(absent.code == 3);
}

TEST_CASE("bad command lines exit with code 2") {
  const fs::path dir = fresh_dir("orthoprobe-cli-usage");
  CHECK(run("", dir).code == 2);
  CHECK(run("synth", dir).code == 2);
  CHECK(run("frobnicate --config x.json", dir).code == 2);
  CHECK(run("--help", dir).code == 0);
}
