#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "orthoprobe/linalg.hpp"
#include "orthoprobe/objective.hpp"
#include "orthoprobe/treebank.hpp"

namespace ortho {

/// Token embeddings for one encoder layer, one matrix per sentence in
/// treebank order. Values are widened to double on load; the file stores
/// single precision.
struct EmbeddingSet {
  int layer = 0;
  int dim = 0;
  std::vector<Matrix> sentences;  // each tokens × dim
};

/// Recipe for synthetic embeddings that hide a known tree metric inside a
/// low-rank subspace under a seeded rotation. The target half of
/// planted_structure is ignored: the construction realizes depth and distance
/// of the same tree simultaneously.
struct PlantedSpec {
  int ambient_dim = 0;
  ObjectiveId planted_structure;
  double noise_scale = 0.0;
  std::uint64_t rotation_seed = 0;
  std::uint64_t data_seed = 0;  // seeds per-sentence trees when planting the random structure
  int layer = 0;
};

/// Coordinate ranges of the pre-rotation construction: one block per planted
/// structure, then noise coordinates. Block ranks equal the largest sentence
/// length minus one. Lets tests rebuild the oracle scaling vector.
struct PlantedLayout {
  int ambient_dim = 0;
  std::vector<Structure> structures;
  std::vector<int> block_offset;
  std::vector<int> block_rank;
  int noise_offset = 0;  // total planted rank
};

PlantedLayout planted_layout(const std::vector<AnnotatedSentence>& treebank, int ambient_dim,
                             const std::vector<Structure>& structures);

/// Reads the OPEMB binary format. Throws FormatError (with the byte offset)
/// on bad magic, unsupported version, or truncation.
EmbeddingSet read_embeddings(std::istream& in);

/// As above, then checks sentence count and per-sentence token counts against
/// the treebank; mismatches throw DataError naming the sentence.
EmbeddingSet read_embeddings(std::istream& in, const std::vector<AnnotatedSentence>& treebank);

/// Writes the OPEMB binary format: magic "OPEMB\0", u8 version 1, u32 layer,
/// u32 sentence count, u32 dim, then per sentence a u32 token count followed
/// by row-major float32 values. All integers little-endian.
void write_embeddings(const EmbeddingSet& set, std::ostream& out);

/// The tree of one sentence under a tree-based structure: the dependency
/// tree, the left-to-right chain, or the seeded random tree. Hypernymy has no
/// per-sentence tree and is rejected with ConfigError.
RootedTree structure_tree(const AnnotatedSentence& s, Structure structure,
                          std::uint64_t data_seed);

/// Plants each structure's tree metric in its own coordinate block: token i's
/// block coordinates are 0/1 indicators of the edges on its root path, so
/// squared distances equal tree distances and squared norms equal depths.
/// Remaining coordinates carry Gaussian noise scaled by noise_scale, and the
/// whole space is rotated by random_orthogonal(ambient_dim, rotation_seed).
/// Throws ConfigError when the planted ranks exceed ambient_dim.
EmbeddingSet synthesize_planted_blocks(const std::vector<AnnotatedSentence>& treebank,
                                       int ambient_dim,
                                       const std::vector<Structure>& structures,
                                       double noise_scale, std::uint64_t rotation_seed,
                                       std::uint64_t data_seed, int layer);

/// Single-structure convenience wrapper around synthesize_planted_blocks.
EmbeddingSet synthesize_planted(const std::vector<AnnotatedSentence>& treebank,
                                const PlantedSpec& spec);

}  // namespace ortho
