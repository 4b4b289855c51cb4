#include <atomic>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "orthoprobe/checkpoint.hpp"
#include "orthoprobe/errors.hpp"

namespace ortho::cli {

namespace {

using nlohmann::json;

struct LayerData {
  EmbeddingSet train_embeddings;
  EmbeddingSet dev_embeddings;
  ObjectiveData train;
  ObjectiveData dev;
};

struct Job {
  int layer = 0;
  std::uint64_t seed = 0;
  const LayerData* data = nullptr;
};

json history_json(const ExperimentConfig& config, const Job& job, const TrainResult& result) {
  json epochs = json::array();
  for (const EpochRecord& r : result.history) {
    epochs.push_back({{"epoch", r.epoch},
                      {"train_loss", r.train_loss},
                      {"val_loss", r.val_loss},
                      {"dso", r.dso},
                      {"sparsity_penalty", r.sparsity_penalty},
                      {"lr", r.lr},
                      {"sparsity_active", r.sparsity_active},
                      {"skipped_sentences", r.skipped_sentences}});
  }
  json objectives = json::array();
  for (ObjectiveId id : config.objectives) objectives.push_back(id.name());
  return {{"layer", job.layer},
          {"seed", job.seed},
          {"mode", std::string(mode_name(config.mode))},
          {"objectives", objectives},
          {"data_seed", config.data_seed},
          {"best_epoch", result.best_epoch},
          {"best_val_loss", result.best_val_loss},
          {"epochs", epochs}};
}

}  // namespace

void cmd_train(ExperimentConfig& config, bool force) {
  validate_objectives(config);

  const auto train_treebank = load_treebank(config.train_conllu);
  const auto dev_treebank = load_treebank(config.dev_conllu);
  std::optional<Taxonomy> taxonomy;
  if (config.has_taxonomy) taxonomy = load_taxonomy_file(config.taxonomy);
  DatasetOptions options;
  options.data_seed = config.data_seed;
  options.taxonomy = taxonomy ? &*taxonomy : nullptr;

  std::map<int, LayerData> layers;
  for (int layer : config.layers) {
    LayerData& slot = layers[layer];
    slot.train_embeddings =
        load_embedding_file(embeddings_path(config, "train", layer), train_treebank);
    slot.dev_embeddings = load_embedding_file(embeddings_path(config, "dev", layer), dev_treebank);
    slot.train = build_examples(train_treebank, slot.train_embeddings, config.objectives, options);
    slot.dev = build_examples(dev_treebank, slot.dev_embeddings, config.objectives, options);
  }

  std::vector<Job> jobs;
  for (int layer : config.layers) {
    for (std::uint64_t seed : config.seeds) jobs.push_back({layer, seed, &layers.at(layer)});
  }

  std::vector<std::string> summaries(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto run_job = [&](const Job& job, std::string& summary) {
    const auto ckpt_path = checkpoint_path(config, job.layer, job.seed);
    const auto hist_path = history_path(config, job.layer, job.seed);
    if (!force && std::filesystem::exists(ckpt_path) && std::filesystem::exists(hist_path)) {
      summary = "already trained, skipped (use --force to redo)";
      return;
    }
    TrainConfig trainer = config.trainer;
    trainer.mode = config.mode;
    trainer.objectives = config.objectives;
    trainer.seed = job.seed;
    const TrainResult result = train(trainer, job.data->train, job.data->dev);
    save_checkpoint_file({config.mode, result.best_params}, ckpt_path);
    write_file_atomic(hist_path, history_json(config, job, result).dump(2) + "\n");
    summary = "best epoch " + std::to_string(result.best_epoch) + ", val loss " +
              std::to_string(result.best_val_loss) + ", " +
              std::to_string(result.history.size()) + " epochs run";
  };

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        run_job(jobs[i], summaries[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const unsigned n_workers =
      std::min<std::size_t>(worker_cap(), jobs.size() == 0 ? 1 : jobs.size());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::cout << "layer " << jobs[i].layer << " seed " << jobs[i].seed << ": " << summaries[i]
              << "\n";
  }
}

}  // namespace ortho::cli
