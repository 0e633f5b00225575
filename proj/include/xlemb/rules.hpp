#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xlemb/corpus.hpp"

namespace xlemb {

enum class Label { NonHate = 0, Hate = 1 };

std::string_view to_string(Label label);

struct Document {
  Tokens tokens;
  Label label;
};

struct LabeledDataset {
  std::string language;
  std::vector<Document> docs;
  std::size_t dropped_empty = 0;

  std::size_t count(Label label) const;
  // Documents of one class, in order.
  std::vector<Tokens> partition(Label label) const;
  std::vector<Tokens> all_tokens() const;
};

// "label<TAB>text" per line with label 0 (non-hate) or 1 (hate). Documents
// that tokenize to nothing are dropped and counted.
LabeledDataset load_labeled_dataset(const std::filesystem::path& path, const std::string& language,
                                    const TokenizerConfig& cfg = {});

struct DatasetSplit {
  LabeledDataset train, dev, test;
};

// Seeded shuffle, then 70/10/20.
DatasetSplit split_dataset(const LabeledDataset& ds, std::uint64_t seed);

// {antecedent} => {consequent} with document-level support and confidence.
struct AssociationRule {
  std::string antecedent;
  std::string consequent;
  double support = 0.0;     // docs containing both / all docs
  double confidence = 0.0;  // docs containing both / docs containing antecedent
};

struct MiningConfig {
  std::size_t top_n_antecedents = 100;
  double min_support = 0.01;
  double min_confidence = 0.1;
  // Removed from every document before counting.
  std::set<std::string> stopwords;
};

void validate(const MiningConfig& cfg);

// Document frequencies (set semantics per document).
std::map<std::string, std::size_t> document_frequencies(const std::vector<Tokens>& docs,
                                                        const std::set<std::string>& stopwords = {});

// The n most document-frequent words, ties broken lexicographically.
std::vector<std::string> top_terms(const std::vector<Tokens>& docs, std::size_t n,
                                   const std::set<std::string>& stopwords = {});

// Rules for explicitly chosen antecedents.
std::vector<AssociationRule> mine_rules_for(const std::vector<Tokens>& docs,
                                            const std::vector<std::string>& antecedents,
                                            const MiningConfig& cfg);

// Rules for the top_n_antecedents most frequent words. Output is ordered by
// antecedent, then descending confidence, then consequent.
std::vector<AssociationRule> mine_rules(const std::vector<Tokens>& docs, const MiningConfig& cfg);

struct ContextEntry {
  double support = 0.0;
  double confidence = 0.0;
};

// C(x): consequents of the rules with antecedent x.
struct WordContext {
  std::string word;
  std::map<std::string, ContextEntry> entries;
  // Set when x was not an antecedent of any rule.
  std::string warning;

  bool empty() const { return entries.empty(); }
};

WordContext build_context(const std::vector<AssociationRule>& rules, const std::string& x);

// Bundled stopword list for a language; empty set when none ships.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

}  // namespace xlemb
