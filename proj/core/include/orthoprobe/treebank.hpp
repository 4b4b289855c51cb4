#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orthoprobe/linalg.hpp"
#include "orthoprobe/objective.hpp"

namespace ortho {

struct Token {
  int index = 0;  // 1-based position within the sentence
  std::string form;
  std::string lemma;
  std::string upos;
  int head = 0;  // 0 = root, otherwise the 1-based index of the parent token
};

struct AnnotatedSentence {
  std::string id;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
};

/// Rooted tree over token positions 0..n-1.
struct RootedTree {
  int root = 0;
  std::vector<int> parent;  // -1 at the root
  std::vector<int> depth;   // root depth 0

  /// Builds from CoNLL-U style heads (0 = root, otherwise 1-based parent).
  /// Throws DataError unless the heads form a single-rooted tree.
  static RootedTree from_heads(const std::vector<int>& heads);

  /// Builds from an undirected edge list plus a chosen root. Throws DataError
  /// if the edges do not form a spanning tree on n nodes.
  static RootedTree from_edges(int n, const std::vector<std::pair<int, int>>& edges, int root);

  int size() const { return static_cast<int>(parent.size()); }

  /// Heads in CoNLL-U convention (0 = root, else 1-based parent).
  std::vector<int> heads() const;

  /// Undirected edges as (min, max) pairs, sorted.
  std::vector<std::pair<int, int>> edge_list() const;

  /// All-pairs path lengths, via depth + lowest common ancestor.
  Matrix distance_matrix() const;
};

using MaskVector = Eigen::Array<bool, Eigen::Dynamic, 1>;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Gold structure for one sentence under one objective. Both the depth and the
/// distance view are populated; the objective's target picks which one a loss
/// or metric consumes. Entries with a false mask never enter sums; the pair
/// mask diagonal is always false (a token is never scored against itself).
struct GoldLabels {
  ObjectiveId objective;
  Vector depths;
  MaskVector depth_valid;
  Matrix distances;
  MaskMatrix pair_valid;

  int token_count() const { return static_cast<int>(depths.size()); }
  bool all_valid() const;
};

/// Parses CoNLL-U text. Multiword ranges ("3-4") and empty nodes ("3.1") are
/// dropped; `# sent_id = ...` comments name sentences, otherwise ids are
/// synthesized as "s<ordinal>". Throws DataError, naming the sentence, when
/// head links are out of range, cyclic, or do not contain exactly one root.
std::vector<AnnotatedSentence> parse_conllu(std::istream& in);

/// Hypernymy forest plus a (lemma, upos) lexicon resolving tokens to nodes.
class Taxonomy {
 public:
  /// Line format: `E<TAB>child<TAB>parent` declares an edge (a self-parent
  /// declares a root), `L<TAB>lemma<TAB>upos<TAB>node` a lexicon entry, `#`
  /// starts a comment. Throws DataError on parent cycles, conflicting
  /// redefinitions, or lexicon entries naming unknown nodes.
  static Taxonomy load(std::istream& in);

  std::optional<int> resolve(std::string_view lemma, std::string_view upos) const;
  int depth(int node) const { return depth_[node]; }
  int root_of(int node) const { return root_[node]; }

  /// Path length through the lowest common ancestor; nullopt when the nodes
  /// live under different roots.
  std::optional<int> lca_distance(int a, int b) const;

  const std::string& node_name(int node) const { return names_[node]; }
  int node_count() const { return static_cast<int>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::vector<int> parent_;  // node's own id at roots
  std::vector<int> depth_;
  std::vector<int> root_;
  std::map<std::string, int, std::less<>> ids_;
  std::map<std::pair<std::string, std::string>, int> lexicon_;
};

/// Depth = edge count from the dependency root; distance = undirected path
/// length in the dependency tree. Nothing is masked.
GoldLabels dep_labels(const AnnotatedSentence& s, Target target);

/// Depth = 0-based sentence position; distance = |i - j|. Nothing is masked.
GoldLabels positional_labels(int n, Target target);

/// Labels of a uniformly random labeled tree (Prüfer sampling) with a uniform
/// root, fully determined by (n, sentence_seed). Depth and distance variants
/// built from the same seed share the same tree.
GoldLabels random_tree_labels(int n, std::uint64_t sentence_seed, Target target);

/// Taxonomy depth/distance for resolvable NOUN and VERB tokens. Depths are
/// masked for everything else; distances additionally require both tokens to
/// share a part of speech and a taxonomy root.
GoldLabels hypernymy_labels(const AnnotatedSentence& s, const Taxonomy& taxonomy, Target target);

/// Seed for one sentence's random tree, stable across epochs and processes.
std::uint64_t sentence_seed(std::uint64_t data_seed, std::string_view sentence_id);

/// Uniform random labeled tree on n nodes as an undirected edge list.
std::vector<std::pair<int, int>> random_tree_edges(int n, std::mt19937_64& gen);

/// Uniform random rooted tree fully determined by (n, seed); the tree behind
/// random_tree_labels.
RootedTree random_tree(int n, std::uint64_t seed);

/// Dispatches to the generator matching the objective's structure. LEX
/// requires a taxonomy (ConfigError otherwise); RAND derives its per-sentence
/// seed from data_seed and the sentence id.
GoldLabels gold_labels(const AnnotatedSentence& s, ObjectiveId objective,
                       const Taxonomy* taxonomy, std::uint64_t data_seed);

}  // namespace ortho
