#include "orthoprobe/treebank.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <string>

#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

RootedTree RootedTree::from_heads(const std::vector<int>& heads) {
  const int n = static_cast<int>(heads.size());
  if (n == 0) throw DataError("sentence has no tokens");
  RootedTree tree;
  tree.parent.assign(n, -1);
  tree.depth.assign(n, -1);
  int root = -1;
  for (int i = 0; i < n; ++i) {
    const int h = heads[i];
    if (h < 0 || h > n) {
      throw DataError("head " + std::to_string(h) + " of token " + std::to_string(i + 1) +
                      " out of range 0.." + std::to_string(n));
    }
    if (h == 0) {
      if (root >= 0) {
        throw DataError("multiple roots (tokens " + std::to_string(root + 1) + " and " +
                        std::to_string(i + 1) + ")");
      }
      root = i;
    } else {
      tree.parent[i] = h - 1;
    }
  }
  if (root < 0) throw DataError("no root token");
  tree.root = root;

  std::vector<std::vector<int>> children(n);
  for (int i = 0; i < n; ++i) {
    if (tree.parent[i] >= 0) children[tree.parent[i]].push_back(i);
  }
  std::vector<int> order{root};
  tree.depth[root] = 0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    for (int c : children[order[q]]) {
      tree.depth[c] = tree.depth[order[q]] + 1;
      order.push_back(c);
    }
  }
  if (static_cast<int>(order.size()) != n) throw DataError("cyclic head links");
  return tree;
}

RootedTree RootedTree::from_edges(int n, const std::vector<std::pair<int, int>>& edges, int root) {
  if (n <= 0) throw DataError("tree must have at least one node");
  if (root < 0 || root >= n) throw DataError("root index out of range");
  if (static_cast<int>(edges.size()) != n - 1) {
    throw DataError("expected " + std::to_string(n - 1) + " edges, got " +
                    std::to_string(edges.size()));
  }
  std::vector<std::vector<int>> adjacency(n);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n || u == v) throw DataError("invalid edge");
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  RootedTree tree;
  tree.root = root;
  tree.parent.assign(n, -1);
  tree.depth.assign(n, -1);
  std::vector<int> order{root};
  tree.depth[root] = 0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    const int u = order[q];
    for (int v : adjacency[u]) {
      if (tree.depth[v] >= 0) continue;
      tree.parent[v] = u;
      tree.depth[v] = tree.depth[u] + 1;
      order.push_back(v);
    }
  }
  if (static_cast<int>(order.size()) != n) throw DataError("edges do not span all nodes");
  return tree;
}

std::vector<int> RootedTree::heads() const {
  std::vector<int> out(parent.size());
  for (std::size_t i = 0; i < parent.size(); ++i) out[i] = parent[i] < 0 ? 0 : parent[i] + 1;
  return out;
}

std::vector<std::pair<int, int>> RootedTree::edge_list() const {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < size(); ++i) {
    if (parent[i] < 0) continue;
    edges.emplace_back(std::min(i, parent[i]), std::max(i, parent[i]));
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

Matrix RootedTree::distance_matrix() const {
  const int n = size();
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int a = i;
      int b = j;
      while (depth[a] > depth[b]) a = parent[a];
      while (depth[b] > depth[a]) b = parent[b];
      while (a != b) {
        a = parent[a];
        b = parent[b];
      }
      const double dist = depth[i] + depth[j] - 2 * depth[a];
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

std::vector<AnnotatedSentence> parse_conllu(std::istream& in) {
  std::vector<AnnotatedSentence> out;
  std::vector<Token> tokens;
  std::string explicit_id;
  int line_no = 0;
  std::string line;

  auto flush = [&]() {
    if (tokens.empty()) {
      explicit_id.clear();
      return;
    }
    AnnotatedSentence sentence;
    sentence.id = explicit_id.empty() ? "s" + std::to_string(out.size() + 1) : explicit_id;
    sentence.tokens = std::move(tokens);
    tokens.clear();
    explicit_id.clear();
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      if (sentence.tokens[i].index != static_cast<int>(i) + 1) {
        throw DataError("sentence " + sentence.id + ": token ids not contiguous (expected " +
                        std::to_string(i + 1) + ", found " +
                        std::to_string(sentence.tokens[i].index) + ")");
      }
    }
    std::vector<int> heads(sentence.tokens.size());
    for (std::size_t i = 0; i < heads.size(); ++i) heads[i] = sentence.tokens[i].head;
    try {
      RootedTree::from_heads(heads);
    } catch (const DataError& e) {
      throw DataError("sentence " + sentence.id + ": " + e.what());
    }
    out.push_back(std::move(sentence));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      std::string_view body = trim(std::string_view(line).substr(1));
      if (body.substr(0, 7) == "sent_id") {
        std::string_view rest = trim(body.substr(7));
        if (!rest.empty() && rest.front() == '=') explicit_id = std::string(trim(rest.substr(1)));
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw DataError("line " + std::to_string(line_no) + ": expected 10 columns, found " +
                      std::to_string(cols.size()));
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos) continue;  // multiword range
    if (id.find('.') != std::string_view::npos) continue;  // empty node
    if (!is_integer(id)) {
      throw DataError("line " + std::to_string(line_no) + ": malformed token id '" +
                      std::string(id) + "'");
    }
    if (!is_integer(cols[6])) {
      throw DataError("line " + std::to_string(line_no) + ": malformed head '" +
                      std::string(cols[6]) + "'");
    }
    Token token;
    token.index = std::stoi(std::string(id));
    token.form = std::string(cols[1]);
    token.lemma = std::string(cols[2]);
    token.upos = std::string(cols[3]);
    token.head = std::stoi(std::string(cols[6]));
    tokens.push_back(std::move(token));
  }
  flush();
  return out;
}

Taxonomy Taxonomy::load(std::istream& in) {
  Taxonomy tax;
  struct LexEntry {
    std::string lemma, upos, node;
    int line;
  };
  std::vector<LexEntry> lex_entries;

  auto intern = [&tax](std::string_view name) {
    if (auto it = tax.ids_.find(name); it != tax.ids_.end()) return it->second;
    const int id = static_cast<int>(tax.names_.size());
    tax.names_.emplace_back(name);
    tax.parent_.push_back(-1);  // -1 until an edge line defines the parent
    tax.ids_.emplace(std::string(name), id);
    return id;
  };

  int line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (cols[0] == "E") {
      if (cols.size() != 3) {
        throw DataError("taxonomy line " + std::to_string(line_no) + ": E record needs 3 fields");
      }
      const int child = intern(cols[1]);
      const int parent = intern(cols[2]);
      if (tax.parent_[child] >= 0 && tax.parent_[child] != parent) {
        throw DataError("taxonomy line " + std::to_string(line_no) + ": node '" +
                        std::string(cols[1]) + "' redefined with a different parent");
      }
      tax.parent_[child] = parent;
    } else if (cols[0] == "L") {
      if (cols.size() != 4) {
        throw DataError("taxonomy line " + std::to_string(line_no) + ": L record needs 4 fields");
      }
      lex_entries.push_back(
          {std::string(cols[1]), std::string(cols[2]), std::string(cols[3]), line_no});
    } else {
      throw DataError("taxonomy line " + std::to_string(line_no) + ": unknown record type '" +
                      std::string(cols[0]) + "'");
    }
  }

  const int n = tax.node_count();
  tax.depth_.assign(n, -1);
  tax.root_.assign(n, -1);
  std::vector<int> state(n, 0);  // 0 unvisited, 1 on current walk, 2 resolved
  for (int v = 0; v < n; ++v) {
    if (state[v] == 2) continue;
    std::vector<int> chain;
    int u = v;
    while (true) {
      if (state[u] == 2) break;
      if (state[u] == 1) {
        throw DataError("taxonomy: cycle through node '" + tax.names_[u] + "'");
      }
      state[u] = 1;
      chain.push_back(u);
      const int p = tax.parent_[u];
      if (p < 0 || p == u) {
        tax.parent_[u] = u;
        tax.depth_[u] = 0;
        tax.root_[u] = u;
        state[u] = 2;
        chain.pop_back();
        break;
      }
      u = p;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const int p = tax.parent_[*it];
      tax.depth_[*it] = tax.depth_[p] + 1;
      tax.root_[*it] = tax.root_[p];
      state[*it] = 2;
    }
  }

  for (const auto& entry : lex_entries) {
    const auto node = tax.ids_.find(entry.node);
    if (node == tax.ids_.end()) {
      throw DataError("taxonomy line " + std::to_string(entry.line) +
                      ": lexicon entry names unknown node '" + entry.node + "'");
    }
    const auto key = std::make_pair(entry.lemma, entry.upos);
    if (auto it = tax.lexicon_.find(key);
        it != tax.lexicon_.end() && it->second != node->second) {
      throw DataError("taxonomy line " + std::to_string(entry.line) + ": lemma '" + entry.lemma +
                      "' (" + entry.upos + ") mapped to two different nodes");
    }
    tax.lexicon_.emplace(key, node->second);
  }
  return tax;
}

std::optional<int> Taxonomy::resolve(std::string_view lemma, std::string_view upos) const {
  const auto it = lexicon_.find(std::make_pair(std::string(lemma), std::string(upos)));
  if (it == lexicon_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Taxonomy::lca_distance(int a, int b) const {
  if (root_[a] != root_[b]) return std::nullopt;
  const int total = depth_[a] + depth_[b];
  while (depth_[a] > depth_[b]) a = parent_[a];
  while (depth_[b] > depth_[a]) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return total - 2 * depth_[a];
}

bool GoldLabels::all_valid() const {
  if (!depth_valid.all()) return false;
  const int n = token_count();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !pair_valid(i, j)) return false;
    }
  }
  return true;
}

namespace {

GoldLabels labels_from_tree(const RootedTree& tree, Structure structure, Target target) {
  const int n = tree.size();
  GoldLabels g;
  g.objective = ObjectiveId{structure, target};
  g.depths = Vector(n);
  for (int i = 0; i < n; ++i) g.depths[i] = tree.depth[i];
  g.depth_valid = MaskVector::Constant(n, true);
  g.distances = tree.distance_matrix();
  g.pair_valid = MaskMatrix::Constant(n, n, true);
  for (int i = 0; i < n; ++i) g.pair_valid(i, i) = false;
  return g;
}

}  // namespace

GoldLabels dep_labels(const AnnotatedSentence& s, Target target) {
  std::vector<int> heads(s.tokens.size());
  for (std::size_t i = 0; i < heads.size(); ++i) heads[i] = s.tokens[i].head;
  return labels_from_tree(RootedTree::from_heads(heads), Structure::Dep, target);
}

GoldLabels positional_labels(int n, Target target) {
  if (n <= 0) throw DataError("sentence length must be positive");
  GoldLabels g;
  g.objective = ObjectiveId{Structure::Pos, target};
  g.depths = Vector(n);
  for (int i = 0; i < n; ++i) g.depths[i] = i;
  g.depth_valid = MaskVector::Constant(n, true);
  g.distances = Matrix(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g.distances(i, j) = std::abs(i - j);
  }
  g.pair_valid = MaskMatrix::Constant(n, n, true);
  for (int i = 0; i < n; ++i) g.pair_valid(i, i) = false;
  return g;
}

RootedTree random_tree(int n, std::uint64_t seed) {
  auto gen = rng::engine(seed);
  const auto edges = random_tree_edges(n, gen);
  const int root = static_cast<int>(rng::uniform_below(gen, static_cast<std::uint64_t>(n)));
  return RootedTree::from_edges(n, edges, root);
}

GoldLabels random_tree_labels(int n, std::uint64_t seed, Target target) {
  return labels_from_tree(random_tree(n, seed), Structure::Rand, target);
}

GoldLabels hypernymy_labels(const AnnotatedSentence& s, const Taxonomy& taxonomy, Target target) {
  const int n = s.size();
  GoldLabels g;
  g.objective = ObjectiveId{Structure::Lex, target};
  g.depths = Vector::Zero(n);
  g.depth_valid = MaskVector::Constant(n, false);
  g.distances = Matrix::Zero(n, n);
  g.pair_valid = MaskMatrix::Constant(n, n, false);
  std::vector<int> node(n, -1);
  for (int i = 0; i < n; ++i) {
    const Token& token = s.tokens[i];
    if (token.upos != "NOUN" && token.upos != "VERB") continue;
    if (const auto id = taxonomy.resolve(token.lemma, token.upos)) {
      node[i] = *id;
      g.depths[i] = taxonomy.depth(*id);
      g.depth_valid[i] = true;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (node[i] < 0) continue;
    for (int j = i + 1; j < n; ++j) {
      if (node[j] < 0 || s.tokens[i].upos != s.tokens[j].upos) continue;
      if (const auto d = taxonomy.lca_distance(node[i], node[j])) {
        g.distances(i, j) = g.distances(j, i) = *d;
        g.pair_valid(i, j) = g.pair_valid(j, i) = true;
      }
    }
  }
  return g;
}

std::uint64_t sentence_seed(std::uint64_t data_seed, std::string_view sentence_id) {
  return rng::combine(data_seed, rng::fnv1a(sentence_id));
}

std::vector<std::pair<int, int>> random_tree_edges(int n, std::mt19937_64& gen) {
  if (n <= 0) throw DataError("tree size must be positive");
  std::vector<std::pair<int, int>> edges;
  if (n == 1) return edges;
  if (n == 2) {
    edges.emplace_back(0, 1);
    return edges;
  }
  std::vector<int> prufer(n - 2);
  for (auto& a : prufer) a = static_cast<int>(rng::uniform_below(gen, static_cast<std::uint64_t>(n)));
  std::vector<int> degree(n, 1);
  for (int a : prufer) ++degree[a];
  std::set<int> leaves;
  for (int i = 0; i < n; ++i) {
    if (degree[i] == 1) leaves.insert(i);
  }
  for (int a : prufer) {
    const int leaf = *leaves.begin();
    leaves.erase(leaves.begin());
    edges.emplace_back(std::min(leaf, a), std::max(leaf, a));
    if (--degree[a] == 1) leaves.insert(a);
  }
  const int u = *leaves.begin();
  const int v = *std::next(leaves.begin());
  edges.emplace_back(std::min(u, v), std::max(u, v));
  return edges;
}

GoldLabels gold_labels(const AnnotatedSentence& s, ObjectiveId objective,
                       const Taxonomy* taxonomy, std::uint64_t data_seed) {
  switch (objective.structure) {
    case Structure::Dep:
      return dep_labels(s, objective.target);
    case Structure::Pos:
      return positional_labels(s.size(), objective.target);
    case Structure::Rand:
      return random_tree_labels(s.size(), sentence_seed(data_seed, s.id), objective.target);
    case Structure::Lex:
      if (taxonomy == nullptr) {
        throw ConfigError("lex objectives require a taxonomy file");
      }
      return hypernymy_labels(s, *taxonomy, objective.target);
  }
  throw ConfigError("invalid structure value");
}

}  // namespace ortho
