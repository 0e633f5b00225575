#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "xlemb/embedding_store.hpp"

namespace xlemb {

using WordPair = std::pair<std::string, std::string>;

// Ordered (source, target) word pairs. A source word may have several
// targets. Construction drops duplicate pairs, keeping first occurrences.
class BilingualLexicon {
 public:
  BilingualLexicon(std::string src_lang, std::string tgt_lang, std::vector<WordPair> pairs);

  const std::string& src_lang() const { return src_lang_; }
  const std::string& tgt_lang() const { return tgt_lang_; }
  const std::vector<WordPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  // Distinct source words in order of first appearance.
  std::vector<std::string> source_words() const;

 private:
  std::string src_lang_;
  std::string tgt_lang_;
  std::vector<WordPair> pairs_;
};

struct LexiconLoadReport {
  std::size_t duplicate_pairs = 0;
  std::size_t multiword_dropped = 0;
};

// "src<TAB>tgt1[,tgt2,...]" per line, '#' comment lines skipped. Each
// comma-separated alternative becomes its own pair; words are lowercased and
// entries containing whitespace are dropped.
BilingualLexicon load_lexicon(const std::filesystem::path& path, const std::string& src,
                              const std::string& tgt, LexiconLoadReport* report = nullptr);

void save_lexicon(const BilingualLexicon& lex, const std::filesystem::path& path);

// Keeps pairs whose words are in their space's vocabulary. Throws
// Error(InsufficientOverlap) when nothing survives.
BilingualLexicon restrict_to_vocab(const BilingualLexicon& lex, const EmbeddingSpace& src_space,
                                   const EmbeddingSpace& tgt_space, std::size_t* dropped = nullptr);

struct LexiconSplit {
  BilingualLexicon train;
  BilingualLexicon validation;
};

// Split by source word: ceil(train_fraction * distinct sources) source words
// go to `train` with all their pairs. Deterministic for a given seed.
LexiconSplit split_lexicon(const BilingualLexicon& lex, double train_fraction,
                           std::uint64_t rng_seed);

}  // namespace xlemb
