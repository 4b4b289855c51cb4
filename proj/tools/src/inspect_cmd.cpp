#include <algorithm>
#include <iostream>
#include <map>

#include "commands.hpp"

namespace ortho::cli {

void cmd_inspect(const std::filesystem::path& path) {
  const auto treebank = load_treebank(path);
  std::size_t tokens = 0;
  int min_len = 0;
  int max_len = 0;
  std::map<std::string, int> upos_counts;
  for (const AnnotatedSentence& s : treebank) {
    tokens += s.tokens.size();
    min_len = min_len == 0 ? s.size() : std::min(min_len, s.size());
    max_len = std::max(max_len, s.size());
    for (const Token& t : s.tokens) ++upos_counts[t.upos];
  }
  std::cout << "sentences\t" << treebank.size() << "\n";
  std::cout << "tokens\t" << tokens << "\n";
  if (!treebank.empty()) {
    std::cout << "length_min\t" << min_len << "\n";
    std::cout << "length_max\t" << max_len << "\n";
    std::cout << "length_mean\t" << static_cast<double>(tokens) / treebank.size() << "\n";
  }
  for (const auto& [upos, count] : upos_counts) {
    std::cout << "upos\t" << upos << "\t" << count << "\n";
  }
}

}  // namespace ortho::cli
