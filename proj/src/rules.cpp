#include "xlemb/rules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

std::string_view to_string(Label label) { return label == Label::Hate ? "hate" : "non-hate"; }

std::size_t LabeledDataset::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(docs.begin(), docs.end(), [&](const Document& d) { return d.label == label; }));
}

std::vector<Tokens> LabeledDataset::partition(Label label) const {
  std::vector<Tokens> out;
  for (const auto& d : docs)
    if (d.label == label) out.push_back(d.tokens);
  return out;
}

std::vector<Tokens> LabeledDataset::all_tokens() const {
  std::vector<Tokens> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.tokens);
  return out;
}

LabeledDataset load_labeled_dataset(const std::filesystem::path& path, const std::string& language,
                                    const TokenizerConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  LabeledDataset ds;
  ds.language = language;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw format_error(path.string(), line_no, "expected 'label<TAB>text'");
    std::string_view label = trim(std::string_view(line).substr(0, tab));
    Label parsed;
    if (label == "1")
      parsed = Label::Hate;
    else if (label == "0")
      parsed = Label::NonHate;
    else
      throw format_error(path.string(), line_no, "unknown label '" + std::string(label) + "'");
    Tokens toks = tokenize(std::string_view(line).substr(tab + 1), cfg);
    if (toks.empty()) {
      ++ds.dropped_empty;
      continue;
    }
    ds.docs.push_back({std::move(toks), parsed});
  }
  return ds;
}

DatasetSplit split_dataset(const LabeledDataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> idx(ds.docs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);

  const std::size_t n = idx.size();
  const std::size_t n_train = n * 7 / 10;
  const std::size_t n_dev = n / 10;
  DatasetSplit out;
  for (auto* part : {&out.train, &out.dev, &out.test}) part->language = ds.language;
  for (std::size_t i = 0; i < n; ++i) {
    auto& part = i < n_train ? out.train : (i < n_train + n_dev ? out.dev : out.test);
    part.docs.push_back(ds.docs[idx[i]]);
  }
  return out;
}

void validate(const MiningConfig& cfg) {
  if (cfg.top_n_antecedents < 1) throw Error(ErrorKind::Config, "mining.top_n must be >= 1");
  if (!(cfg.min_support > 0.0 && cfg.min_support <= 1.0))
    throw Error(ErrorKind::Config, "mining.min_support must lie in (0, 1]");
  if (!(cfg.min_confidence > 0.0 && cfg.min_confidence <= 1.0))
    throw Error(ErrorKind::Config, "mining.min_confidence must lie in (0, 1]");
}

namespace {

using DocSets = std::vector<std::unordered_set<std::string>>;

DocSets to_sets(const std::vector<Tokens>& docs, const std::set<std::string>& stopwords) {
  DocSets sets;
  sets.reserve(docs.size());
  for (const auto& d : docs) {
    std::unordered_set<std::string> s;
    for (const auto& t : d)
      if (!stopwords.count(t)) s.insert(t);
    sets.push_back(std::move(s));
  }
  return sets;
}

}  // namespace

std::map<std::string, std::size_t> document_frequencies(const std::vector<Tokens>& docs,
                                                        const std::set<std::string>& stopwords) {
  std::map<std::string, std::size_t> df;
  for (const auto& s : to_sets(docs, stopwords))
    for (const auto& w : s) ++df[w];
  return df;
}

std::vector<std::string> top_terms(const std::vector<Tokens>& docs, std::size_t n,
                                   const std::set<std::string>& stopwords) {
  auto df = document_frequencies(docs, stopwords);
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<AssociationRule> mine_rules_for(const std::vector<Tokens>& docs,
                                            const std::vector<std::string>& antecedents,
                                            const MiningConfig& cfg) {
  validate(cfg);
  if (docs.empty()) throw Error(ErrorKind::InsufficientData, "rule mining needs documents");
  const DocSets sets = to_sets(docs, cfg.stopwords);
  const double n_docs = static_cast<double>(sets.size());

  std::vector<std::string> sorted(antecedents.begin(), antecedents.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<AssociationRule> rules;
  for (const auto& x : sorted) {
    std::size_t df_x = 0;
    std::map<std::string, std::size_t> joint;
    for (const auto& s : sets) {
      if (!s.count(x)) continue;
      ++df_x;
      for (const auto& u : s)
        if (u != x) ++joint[u];
    }
    if (df_x == 0) continue;
    std::vector<AssociationRule> for_x;
    for (const auto& [u, c] : joint) {
      double support = static_cast<double>(c) / n_docs;
      double confidence = static_cast<double>(c) / static_cast<double>(df_x);
      if (support >= cfg.min_support && confidence >= cfg.min_confidence)
        for_x.push_back({x, u, support, confidence});
    }
    // `joint` iterates by consequent, so a stable sort keeps word order on ties.
    std::stable_sort(for_x.begin(), for_x.end(),
                     [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
    rules.insert(rules.end(), for_x.begin(), for_x.end());
  }
  return rules;
}

std::vector<AssociationRule> mine_rules(const std::vector<Tokens>& docs, const MiningConfig& cfg) {
  validate(cfg);
  return mine_rules_for(docs, top_terms(docs, cfg.top_n_antecedents, cfg.stopwords), cfg);
}

WordContext build_context(const std::vector<AssociationRule>& rules, const std::string& x) {
  WordContext ctx;
  ctx.word = x;
  for (const auto& r : rules)
    if (r.antecedent == x) ctx.entries[r.consequent] = {r.support, r.confidence};
  if (ctx.entries.empty()) ctx.warning = "'" + x + "' is not the antecedent of any mined rule";
  return ctx;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(to_lower_utf8(w));
  }
  return out;
}

}  // namespace xlemb
