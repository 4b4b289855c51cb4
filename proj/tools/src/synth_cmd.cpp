#include <array>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "orthoprobe/errors.hpp"
#include "orthoprobe/rng.hpp"

namespace ortho::cli {

namespace {

constexpr const char* kTaxonomy = R"(# synthetic hypernymy taxonomy
E	entity	entity
E	object	entity
E	animal	object
E	mammal	animal
E	dog	mammal
E	cat	mammal
E	horse	mammal
E	bird	animal
E	sparrow	bird
E	eagle	bird
E	fish	animal
E	salmon	fish
E	plant	object
E	oak	plant
E	pine	plant
E	fern	plant
E	artifact	object
E	tool	artifact
E	hammer	tool
E	saw	tool
E	chisel	tool
E	vehicle	artifact
E	cart	vehicle
E	sled	vehicle
E	substance	object
E	water	substance
E	stone	substance
E	act	act
E	motion	act
E	run	motion
E	walk	motion
E	swim	motion
E	perception	act
E	see	perception
E	hear	perception
E	change	act
E	grow	change
E	melt	change
E	break	change
L	dog	NOUN	dog
L	cat	NOUN	cat
L	horse	NOUN	horse
L	sparrow	NOUN	sparrow
L	eagle	NOUN	eagle
L	salmon	NOUN	salmon
L	oak	NOUN	oak
L	pine	NOUN	pine
L	fern	NOUN	fern
L	hammer	NOUN	hammer
L	saw	NOUN	saw
L	chisel	NOUN	chisel
L	cart	NOUN	cart
L	sled	NOUN	sled
L	water	NOUN	water
L	stone	NOUN	stone
L	tool	NOUN	tool
L	animal	NOUN	animal
L	run	VERB	run
L	walk	VERB	walk
L	swim	VERB	swim
L	see	VERB	see
L	hear	VERB	hear
L	grow	VERB	grow
L	melt	VERB	melt
L	break	VERB	break
)";

const std::vector<std::string> kNouns = {"dog",  "cat",    "horse", "sparrow", "eagle", "salmon",
                                         "oak",  "pine",   "fern",  "hammer",  "saw",   "chisel",
                                         "cart", "sled",   "water", "stone",   "tool",  "animal"};
const std::vector<std::string> kVerbs = {"run", "walk", "swim", "see", "hear", "grow", "melt",
                                         "break"};
const std::vector<std::string> kDeterminers = {"the", "a", "this"};
const std::vector<std::string> kAdjectives = {"old", "small", "red", "quiet"};
const std::vector<std::string> kAdverbs = {"slowly", "often", "here"};
const std::vector<std::string> kPronouns = {"it", "they", "she"};

struct TokenDraw {
  std::string upos;
  std::string lemma;
};

TokenDraw draw_token(std::mt19937_64& gen) {
  const std::uint64_t roll = rng::uniform_below(gen, 100);
  auto pick = [&gen](const std::vector<std::string>& pool) {
    return pool[rng::uniform_below(gen, pool.size())];
  };
  if (roll < 35) return {"NOUN", pick(kNouns)};
  if (roll < 55) return {"VERB", pick(kVerbs)};
  if (roll < 70) return {"DET", pick(kDeterminers)};
  if (roll < 80) return {"ADJ", pick(kAdjectives)};
  if (roll < 88) return {"ADV", pick(kAdverbs)};
  return {"PRON", pick(kPronouns)};
}

AnnotatedSentence draw_sentence(const SynthSpec& spec, const std::string& id,
                                std::mt19937_64& gen) {
  const int span = spec.max_length - spec.min_length + 1;
  const int n = spec.min_length + static_cast<int>(rng::uniform_below(gen, span));
  const auto edges = random_tree_edges(n, gen);
  const int root = static_cast<int>(rng::uniform_below(gen, n));
  const std::vector<int> heads = RootedTree::from_edges(n, edges, root).heads();

  AnnotatedSentence sentence;
  sentence.id = id;
  sentence.tokens.reserve(n);
  for (int i = 0; i < n; ++i) {
    TokenDraw draw = draw_token(gen);
    Token token;
    token.index = i + 1;
    token.form = draw.lemma;
    token.lemma = std::move(draw.lemma);
    token.upos = std::move(draw.upos);
    token.head = heads[i];
    sentence.tokens.push_back(std::move(token));
  }
  return sentence;
}

std::string to_conllu(const std::vector<AnnotatedSentence>& sentences) {
  std::ostringstream out;
  for (const AnnotatedSentence& s : sentences) {
    out << "# sent_id = " << s.id << "\n# text =";
    for (const Token& t : s.tokens) out << ' ' << t.form;
    out << '\n';
    for (const Token& t : s.tokens) {
      out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << "\t_\t_\t"
          << t.head << '\t' << (t.head == 0 ? "root" : "dep") << "\t_\t_\n";
    }
    out << '\n';
  }
  return out.str();
}

void check_spec(const SynthSpec& spec) {
  if (spec.train_sentences < 1 || spec.dev_sentences < 1 || spec.test_sentences < 1) {
    throw ConfigError("synth: every split needs at least one sentence");
  }
  if (spec.min_length < 1 || spec.max_length < spec.min_length) {
    throw ConfigError("synth: need 1 <= min_length <= max_length");
  }
  if (spec.noise_scale < 0) throw ConfigError("synth.noise_scale: must be nonnegative");
  if (spec.structures.empty()) throw ConfigError("synth.structures: empty");
  for (Structure s : spec.structures) {
    if (s == Structure::Lex) {
      throw ConfigError("synth.structures: hypernymy has no per-sentence tree to plant");
    }
  }
}

}  // namespace

void cmd_synth(const ExperimentConfig& config) {
  check_spec(config.synth);
  const SynthSpec& spec = config.synth;
  if (config.train_conllu.empty() || config.dev_conllu.empty() || config.test_conllu.empty()) {
    throw ConfigError("treebank: synth needs train, dev, and test paths to write to");
  }

  auto gen = rng::engine(rng::combine(config.data_seed, rng::fnv1a("synth-treebank")));
  const std::array<std::pair<const char*, int>, 3> splits = {
      {{"train", spec.train_sentences}, {"dev", spec.dev_sentences}, {"test", spec.test_sentences}}};

  std::vector<std::vector<AnnotatedSentence>> split_sentences;
  std::vector<AnnotatedSentence> combined;
  for (const auto& [split, count] : splits) {
    std::vector<AnnotatedSentence> sentences;
    sentences.reserve(count);
    for (int i = 0; i < count; ++i) {
      sentences.push_back(
          draw_sentence(spec, std::string(split) + "-" + std::to_string(i + 1), gen));
    }
    combined.insert(combined.end(), sentences.begin(), sentences.end());
    split_sentences.push_back(std::move(sentences));
  }

  const std::array<std::filesystem::path, 3> conllu_paths = {config.train_conllu,
                                                             config.dev_conllu,
                                                             config.test_conllu};
  for (std::size_t i = 0; i < splits.size(); ++i) {
    write_file_atomic(conllu_paths[i], to_conllu(split_sentences[i]));
    std::cout << "wrote " << conllu_paths[i].string() << "\n";
  }

  const std::filesystem::path taxonomy_path =
      config.has_taxonomy ? config.taxonomy : config.output_dir / "taxonomy.tsv";
  write_file_atomic(taxonomy_path, kTaxonomy);
  std::cout << "wrote " << taxonomy_path.string() << "\n";

  for (int layer : config.layers) {
    // One construction over all splits so every split shares the layout and
    // rotation; the per-split files are slices of it.
    const EmbeddingSet all =
        synthesize_planted_blocks(combined, spec.ambient_dim, spec.structures, spec.noise_scale,
                                  spec.rotation_seed, config.data_seed, layer);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < splits.size(); ++i) {
      EmbeddingSet piece;
      piece.layer = all.layer;
      piece.dim = all.dim;
      piece.sentences.assign(all.sentences.begin() + offset,
                             all.sentences.begin() + offset + split_sentences[i].size());
      offset += split_sentences[i].size();
      std::ostringstream buffer(std::ios::binary);
      write_embeddings(piece, buffer);
      const std::filesystem::path path = embeddings_path(config, splits[i].first, layer);
      write_file_atomic(path, buffer.str());
      std::cout << "wrote " << path.string() << "\n";
    }
  }
}

}  // namespace ortho::cli
