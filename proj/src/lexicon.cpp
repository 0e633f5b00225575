#include "xlemb/lexicon.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <unordered_set>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

BilingualLexicon::BilingualLexicon(std::string src_lang, std::string tgt_lang,
                                   std::vector<WordPair> pairs)
    : src_lang_(std::move(src_lang)), tgt_lang_(std::move(tgt_lang)) {
  if (src_lang_ == tgt_lang_)
    throw Error(ErrorKind::Config, "lexicon source and target language are both " + src_lang_);
  std::set<WordPair> seen;
  pairs_.reserve(pairs.size());
  for (auto& p : pairs) {
    if (p.first.empty() || p.second.empty())
      throw Error(ErrorKind::Format, "lexicon pair with an empty word");
    if (seen.insert(p).second) pairs_.push_back(std::move(p));
  }
}

std::vector<std::string> BilingualLexicon::source_words() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& [src, tgt] : pairs_)
    if (seen.insert(src).second) out.push_back(src);
  return out;
}

namespace {
bool has_space(std::string_view s) { return s.find_first_of(" \t\r\n\f\v") != std::string_view::npos; }
}  // namespace

BilingualLexicon load_lexicon(const std::filesystem::path& path, const std::string& src,
                              const std::string& tgt, LexiconLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<WordPair> pairs;
  std::set<WordPair> seen;
  LexiconLoadReport r;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split(line, '\t');
    if (cells.size() != 2)
      throw format_error(path.string(), line_no,
                         "expected 2 tab-separated cells, found " + std::to_string(cells.size()));
    std::string_view source = trim(cells[0]);
    if (source.empty()) throw format_error(path.string(), line_no, "empty source word");
    if (has_space(source)) {
      ++r.multiword_dropped;
      continue;
    }
    std::string source_word = to_lower_utf8(source);
    for (std::string_view alt : split(cells[1], ',')) {
      alt = trim(alt);
      if (alt.empty()) continue;
      if (has_space(alt)) {
        ++r.multiword_dropped;
        continue;
      }
      WordPair p{source_word, to_lower_utf8(alt)};
      if (!seen.insert(p).second) {
        ++r.duplicate_pairs;
        continue;
      }
      pairs.push_back(std::move(p));
    }
  }
  if (report) *report = r;
  return BilingualLexicon(src, tgt, std::move(pairs));
}

void save_lexicon(const BilingualLexicon& lex, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  // One row per source word, alternatives comma-joined in pair order.
  for (const auto& src : lex.source_words()) {
    out << src << '\t';
    bool first = true;
    for (const auto& [s, t] : lex.pairs()) {
      if (s != src) continue;
      if (!first) out << ',';
      out << t;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

BilingualLexicon restrict_to_vocab(const BilingualLexicon& lex, const EmbeddingSpace& src_space,
                                   const EmbeddingSpace& tgt_space, std::size_t* dropped) {
  if (src_space.language() != lex.src_lang() || tgt_space.language() != lex.tgt_lang())
    throw Error(ErrorKind::Config, "lexicon " + lex.src_lang() + "->" + lex.tgt_lang() +
                                       " does not match spaces " + src_space.language() + "->" +
                                       tgt_space.language());
  std::vector<WordPair> kept;
  for (const auto& p : lex.pairs())
    if (src_space.contains(p.first) && tgt_space.contains(p.second)) kept.push_back(p);
  if (dropped) *dropped = lex.size() - kept.size();
  if (kept.empty())
    throw Error(ErrorKind::InsufficientOverlap,
                "no " + lex.src_lang() + "->" + lex.tgt_lang() +
                    " lexicon pair has both words in the embedding vocabularies");
  return BilingualLexicon(lex.src_lang(), lex.tgt_lang(), std::move(kept));
}

LexiconSplit split_lexicon(const BilingualLexicon& lex, double train_fraction,
                           std::uint64_t rng_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorKind::Config, "train_fraction must lie in (0, 1)");
  std::vector<std::string> sources = lex.source_words();
  if (sources.size() < 2)
    throw Error(ErrorKind::InsufficientData, "splitting needs at least 2 distinct source words");

  // Fisher-Yates with an explicit engine so the split is stable across
  // standard library implementations.
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = sources.size() - 1; i > 0; --i) {
    std::size_t j = rng() % (i + 1);
    std::swap(sources[i], sources[j]);
  }
  auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(sources.size()) - 1e-9));
  std::unordered_set<std::string> train_sources(sources.begin(), sources.begin() + n_train);

  std::vector<WordPair> train, validation;
  for (const auto& p : lex.pairs()) (train_sources.count(p.first) ? train : validation).push_back(p);
  return {BilingualLexicon(lex.src_lang(), lex.tgt_lang(), std::move(train)),
          BilingualLexicon(lex.src_lang(), lex.tgt_lang(), std::move(validation))};
}

}  // namespace xlemb
