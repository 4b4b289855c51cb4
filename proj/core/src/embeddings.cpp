#include "orthoprobe/embeddings.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "binary_io.hpp"
#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

namespace {

constexpr std::array<unsigned char, 6> kMagic = {0x4F, 0x50, 0x45, 0x4D, 0x42, 0x00};
constexpr std::uint8_t kVersion = 1;
// Guard against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxCount = 1u << 24;

using io::Reader;
using io::Writer;

}  // namespace

EmbeddingSet read_embeddings(std::istream& in) {
  Reader r{in};
  for (unsigned char expected : kMagic) {
    const std::uint64_t at = r.offset;
    if (r.u8("magic") != expected) {
      throw FormatError("bad magic, not an OPEMB file", at);
    }
  }
  const std::uint64_t version_at = r.offset;
  const std::uint8_t version = r.u8("version");
  if (version != kVersion) {
    throw FormatError("unsupported OPEMB version " + std::to_string(version), version_at);
  }
  EmbeddingSet set;
  set.layer = static_cast<int>(r.u32("layer index"));
  const std::uint32_t sentence_count = r.u32("sentence count");
  const std::uint64_t dim_at = r.offset;
  const std::uint32_t dim = r.u32("dim");
  if (sentence_count > kMaxCount || dim == 0 || dim > kMaxCount) {
    throw FormatError("implausible header counts", dim_at);
  }
  set.dim = static_cast<int>(dim);
  set.sentences.reserve(sentence_count);
  for (std::uint32_t s = 0; s < sentence_count; ++s) {
    const std::uint64_t count_at = r.offset;
    const std::uint32_t tokens = r.u32("token count");
    if (tokens == 0 || tokens > kMaxCount) {
      throw FormatError("implausible token count " + std::to_string(tokens), count_at);
    }
    Matrix m(tokens, dim);
    for (std::uint32_t i = 0; i < tokens; ++i) {
      for (std::uint32_t j = 0; j < dim; ++j) m(i, j) = r.f32("embedding value");
    }
    set.sentences.push_back(std::move(m));
  }
  return set;
}

EmbeddingSet read_embeddings(std::istream& in, const std::vector<AnnotatedSentence>& treebank) {
  EmbeddingSet set = read_embeddings(in);
  if (set.sentences.size() != treebank.size()) {
    throw DataError("embedding file has " + std::to_string(set.sentences.size()) +
                    " sentences but the treebank has " + std::to_string(treebank.size()));
  }
  for (std::size_t s = 0; s < treebank.size(); ++s) {
    if (set.sentences[s].rows() != treebank[s].size()) {
      throw DataError("sentence " + treebank[s].id + ": embedding file has " +
                      std::to_string(set.sentences[s].rows()) + " tokens, treebank has " +
                      std::to_string(treebank[s].size()));
    }
  }
  return set;
}

void write_embeddings(const EmbeddingSet& set, std::ostream& out) {
  Writer w{out};
  for (unsigned char b : kMagic) w.u8(b);
  w.u8(kVersion);
  w.u32(static_cast<std::uint32_t>(set.layer));
  w.u32(static_cast<std::uint32_t>(set.sentences.size()));
  w.u32(static_cast<std::uint32_t>(set.dim));
  for (const Matrix& m : set.sentences) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) w.f32(static_cast<float>(m(i, j)));
    }
  }
  if (!out) throw DataError("write failed while emitting embeddings");
}

RootedTree structure_tree(const AnnotatedSentence& s, Structure structure,
                          std::uint64_t data_seed) {
  switch (structure) {
    case Structure::Dep: {
      std::vector<int> heads(s.tokens.size());
      for (std::size_t i = 0; i < heads.size(); ++i) heads[i] = s.tokens[i].head;
      return RootedTree::from_heads(heads);
    }
    case Structure::Pos: {
      std::vector<std::pair<int, int>> chain;
      for (int i = 0; i + 1 < s.size(); ++i) chain.emplace_back(i, i + 1);
      return RootedTree::from_edges(s.size(), chain, 0);
    }
    case Structure::Rand:
      return random_tree(s.size(), sentence_seed(data_seed, s.id));
    case Structure::Lex:
      throw ConfigError("the hypernymy structure has no per-sentence tree to plant");
  }
  throw ConfigError("invalid structure value");
}

PlantedLayout planted_layout(const std::vector<AnnotatedSentence>& treebank, int ambient_dim,
                             const std::vector<Structure>& structures) {
  if (treebank.empty()) throw ConfigError("cannot plant into an empty treebank");
  if (structures.empty()) throw ConfigError("no structures to plant");
  int max_len = 0;
  for (const auto& s : treebank) max_len = std::max(max_len, s.size());
  PlantedLayout layout;
  layout.ambient_dim = ambient_dim;
  layout.structures = structures;
  int offset = 0;
  for (std::size_t b = 0; b < structures.size(); ++b) {
    layout.block_offset.push_back(offset);
    layout.block_rank.push_back(max_len - 1);
    offset += max_len - 1;
  }
  layout.noise_offset = offset;
  if (offset > ambient_dim) {
    throw ConfigError("planted rank " + std::to_string(offset) + " exceeds ambient dim " +
                      std::to_string(ambient_dim));
  }
  return layout;
}

EmbeddingSet synthesize_planted_blocks(const std::vector<AnnotatedSentence>& treebank,
                                       int ambient_dim,
                                       const std::vector<Structure>& structures,
                                       double noise_scale, std::uint64_t rotation_seed,
                                       std::uint64_t data_seed, int layer) {
  const PlantedLayout layout = planted_layout(treebank, ambient_dim, structures);
  const Matrix q = random_orthogonal(ambient_dim, rotation_seed);
  auto noise_gen = rng::engine(rng::combine(rotation_seed, rng::fnv1a("planted-noise")));

  EmbeddingSet set;
  set.layer = layer;
  set.dim = ambient_dim;
  set.sentences.reserve(treebank.size());
  for (const auto& sentence : treebank) {
    const int n = sentence.size();
    Matrix x = Matrix::Zero(n, ambient_dim);
    for (std::size_t b = 0; b < structures.size(); ++b) {
      const RootedTree tree = structure_tree(sentence, structures[b], data_seed);
      const auto edges = tree.edge_list();
      // Token i's coordinates flag the edges on its root path, one coordinate
      // per sentence edge inside this block.
      for (int i = 0; i < n; ++i) {
        int node = i;
        while (tree.parent[node] >= 0) {
          const std::pair<int, int> edge{std::min(node, tree.parent[node]),
                                         std::max(node, tree.parent[node])};
          const auto it = std::lower_bound(edges.begin(), edges.end(), edge);
          const int e = static_cast<int>(it - edges.begin());
          x(i, layout.block_offset[b] + e) = 1.0;
          node = tree.parent[node];
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int j = layout.noise_offset; j < ambient_dim; ++j) {
        x(i, j) = noise_scale * rng::gaussian(noise_gen);
      }
    }
    set.sentences.push_back(x * q.transpose());
  }
  return set;
}

EmbeddingSet synthesize_planted(const std::vector<AnnotatedSentence>& treebank,
                                const PlantedSpec& spec) {
  return synthesize_planted_blocks(treebank, spec.ambient_dim,
                                   {spec.planted_structure.structure}, spec.noise_scale,
                                   spec.rotation_seed, spec.data_seed, spec.layer);
}

}  // namespace ortho
