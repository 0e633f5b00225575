#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xlemb/embedding_store.hpp"

namespace xlemb {

using Tokens = std::vector<std::string>;

struct TokenizerConfig {
  bool lowercase = true;
  bool strip_urls = true;
  bool strip_mentions = true;
  // When false, hashtags are dropped entirely.
  bool keep_hashtag_body = true;
};

// Splits on whitespace, applies the URL / mention / hashtag rules per chunk,
// then emits maximal runs of Unicode letters and digits.
Tokens tokenize(std::string_view text, const TokenizerConfig& cfg = {});

// Seed terms: one per line, '#' starts a comment line. Terms are normalized
// with `cfg`; terms that tokenize to more than one token are skipped.
std::set<std::string> load_seed_terms(const std::filesystem::path& path,
                                      const TokenizerConfig& cfg = {},
                                      std::size_t* skipped_multiword = nullptr);

// Lines whose token set intersects `seeds`, in input order.
std::vector<std::string> filter_corpus(const std::vector<std::string>& lines,
                                       const std::set<std::string>& seeds,
                                       const TokenizerConfig& cfg = {});

// Streaming form; returns the number of lines written.
std::size_t filter_corpus(std::istream& in, std::ostream& out, const std::set<std::string>& seeds,
                          const TokenizerConfig& cfg = {});

// Reads one document per line and tokenizes it. Empty documents are kept as
// empty token lists so line numbers stay aligned.
std::vector<Tokens> read_corpus(const std::filesystem::path& path, const TokenizerConfig& cfg = {});

using Vocabulary = std::map<std::string, std::uint64_t>;

Vocabulary build_vocab(const std::vector<Tokens>& corpus, std::uint64_t min_count);

struct SgnsConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t min_count = 5;
  double subsample_t = 1e-4;
  std::uint64_t rng_seed = 1;
  // 1 = deterministic single-threaded mode. More threads share parameters
  // without locking, so results are no longer reproducible.
  std::size_t threads = 1;
};

// Throws Error(Config) naming the offending field.
void validate(const SgnsConfig& cfg);

// Frequency subsampling as in word2vec: a token with count c out of `total`
// tokens is kept with probability (sqrt(c/(t*total)) + 1) * t*total / c.
// subsample_t == 0 keeps everything.
double keep_probability(std::uint64_t count, std::uint64_t total, double subsample_t);

// Skip-gram with negative sampling over `language` text. Sentences are
// lines; context windows never cross them.
EmbeddingSpace train_sgns(const std::vector<Tokens>& corpus, const SgnsConfig& cfg,
                          const std::string& language = "xx");

}  // namespace xlemb
