#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "orthoprobe/embeddings.hpp"
#include "orthoprobe/objective.hpp"
#include "orthoprobe/treebank.hpp"

namespace ortho {

/// One sentence ready for training or scoring under one objective. The
/// embedding pointer refers into the EmbeddingSet the examples were built
/// from, which must outlive them.
struct Example {
  const Matrix* embedding = nullptr;
  GoldLabels gold;
};

using ObjectiveData = std::map<ObjectiveId, std::vector<Example>>;

struct DatasetOptions {
  std::uint64_t data_seed = 0;         // fixes the random-structure trees
  const Taxonomy* taxonomy = nullptr;  // required for lex objectives
};

/// Builds gold labels for every (sentence, objective) combination, in
/// sentence order. Throws DataError when embeddings and treebank disagree on
/// sentence or token counts.
ObjectiveData build_examples(const std::vector<AnnotatedSentence>& treebank,
                             const EmbeddingSet& embeddings,
                             const std::vector<ObjectiveId>& objectives,
                             const DatasetOptions& options);

}  // namespace ortho
