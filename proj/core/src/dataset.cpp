#include "orthoprobe/dataset.hpp"

#include <string>

#include "orthoprobe/errors.hpp"

namespace ortho {

ObjectiveData build_examples(const std::vector<AnnotatedSentence>& treebank,
                             const EmbeddingSet& embeddings,
                             const std::vector<ObjectiveId>& objectives,
                             const DatasetOptions& options) {
  if (treebank.size() != embeddings.sentences.size()) {
    throw DataError("treebank has " + std::to_string(treebank.size()) +
                    " sentences, embeddings have " + std::to_string(embeddings.sentences.size()));
  }
  for (std::size_t i = 0; i < treebank.size(); ++i) {
    if (embeddings.sentences[i].rows() != treebank[i].size()) {
      throw DataError("sentence " + treebank[i].id + ": treebank has " +
                      std::to_string(treebank[i].size()) + " tokens, embeddings have " +
                      std::to_string(embeddings.sentences[i].rows()));
    }
  }
  ObjectiveData data;
  for (ObjectiveId objective : objectives) {
    std::vector<Example>& examples = data[objective];
    examples.reserve(treebank.size());
    for (std::size_t i = 0; i < treebank.size(); ++i) {
      Example ex;
      ex.embedding = &embeddings.sentences[i];
      ex.gold = gold_labels(treebank[i], objective, options.taxonomy, options.data_seed);
      examples.push_back(std::move(ex));
    }
  }
  return data;
}

}  // namespace ortho
