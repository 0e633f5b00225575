#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "xlemb/alignment.hpp"
#include "xlemb/lexicon.hpp"

namespace xlemb {

struct Neighbor {
  std::string word;
  std::string language;
  double score = 0.0;
};

struct NeighborList {
  std::string query_word;
  std::string query_lang;
  std::vector<Neighbor> neighbors;  // descending score, ties by ascending word
  bool truncated = false;           // k exceeded the candidate count
};

// Unit-normalized shared-space rows of one language, ready for exact cosine
// search.
class NeighborIndex {
 public:
  NeighborIndex(const AlignmentModel& model, const std::string& language, const SpaceSet& spaces);

  const std::string& language() const { return language_; }
  const std::vector<std::string>& words() const { return *words_; }
  std::size_t size() const { return words_->size(); }

  // Exact top-k by cosine. `exclude` (a word of this language) is skipped.
  NeighborList search(const Eigen::VectorXd& query, std::size_t k,
                      const std::string* exclude = nullptr) const;

 private:
  std::string language_;
  const std::vector<std::string>* words_;
  Eigen::MatrixXd unit_rows_;
};

// Nearest target-language words to `query_word`. The query itself is
// excluded only when both languages coincide.
NeighborList knn(const AlignmentModel& model, const SpaceSet& spaces, const std::string& query_word,
                 const std::string& query_lang, const std::string& target_lang, std::size_t k);

struct BliWordResult {
  std::string word;
  std::vector<std::string> gold;
  NeighborList neighbors;
  bool hit = false;
};

struct BliResult {
  double precision = 0.0;
  std::size_t k = 0;
  std::size_t evaluated = 0;
  // Source words dropped because they, or all their targets, are OOV.
  std::size_t excluded = 0;
  std::vector<BliWordResult> per_word;
};

// Precision@k over source words: a word counts as a hit when any of its
// validation targets is among its k nearest target-language neighbors.
BliResult bli_precision_at_k(const AlignmentModel& model, const SpaceSet& spaces,
                             const BilingualLexicon& validation, std::size_t k);

nlohmann::ordered_json to_json(const NeighborList& list, const std::string& target_lang);
nlohmann::ordered_json bli_summary_json(const BliResult& result, const BilingualLexicon& validation);

}  // namespace xlemb
