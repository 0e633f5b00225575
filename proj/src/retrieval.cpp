#include "xlemb/retrieval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "xlemb/error.hpp"

namespace xlemb {

NeighborIndex::NeighborIndex(const AlignmentModel& model, const std::string& language,
                             const SpaceSet& spaces)
    : language_(language) {
  SharedSpace shared = shared_space(model, language, spaces);
  words_ = &shared.source->words();
  unit_rows_ = std::move(shared.vectors);
  for (Eigen::Index i = 0; i < unit_rows_.rows(); ++i) {
    double norm = unit_rows_.row(i).norm();
    if (norm == 0.0)
      throw Error(ErrorKind::UndefinedSimilarity,
                  "'" + (*words_)[i] + "' maps to the zero vector in the shared space");
    unit_rows_.row(i) /= norm;
  }
}

NeighborList NeighborIndex::search(const Eigen::VectorXd& query, std::size_t k,
                                   const std::string* exclude) const {
  if (query.size() != unit_rows_.cols())
    throw Error(ErrorKind::Dimension, "query has dimension " + std::to_string(query.size()) +
                                          ", index has " + std::to_string(unit_rows_.cols()));
  if (k == 0) throw Error(ErrorKind::Config, "k must be positive");
  double qnorm = query.norm();
  if (qnorm == 0.0) throw Error(ErrorKind::UndefinedSimilarity, "query is the zero vector");
  Eigen::VectorXd scores = unit_rows_ * (query / qnorm);

  const auto& words = *words_;
  std::vector<std::size_t> order;
  order.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i)
    if (!exclude || words[i] != *exclude) order.push_back(i);

  NeighborList out;
  out.truncated = k > order.size();
  std::size_t take = std::min(k, order.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return words[a] < words[b];
  };
  std::partial_sort(order.begin(), order.begin() + take, order.end(), better);
  out.neighbors.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.neighbors.push_back(
        {words[order[i]], language_, std::clamp(scores(order[i]), -1.0, 1.0)});
  return out;
}

NeighborList knn(const AlignmentModel& model, const SpaceSet& spaces, const std::string& query_word,
                 const std::string& query_lang, const std::string& target_lang, std::size_t k) {
  Eigen::VectorXd q = project(model, query_word, query_lang, spaces);
  NeighborIndex index(model, target_lang, spaces);
  NeighborList list = index.search(q, k, query_lang == target_lang ? &query_word : nullptr);
  list.query_word = query_word;
  list.query_lang = query_lang;
  return list;
}

BliResult bli_precision_at_k(const AlignmentModel& model, const SpaceSet& spaces,
                             const BilingualLexicon& validation, std::size_t k) {
  const std::string& src = validation.src_lang();
  const std::string& tgt = validation.tgt_lang();
  auto src_it = spaces.find(src);
  auto tgt_it = spaces.find(tgt);
  if (src_it == spaces.end() || tgt_it == spaces.end())
    throw Error(ErrorKind::Config, "embedding spaces for " + src + " and " + tgt + " are required");

  // Group gold targets per source word, in lexicon order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::string>> gold;
  for (const auto& [s, t] : validation.pairs()) {
    auto [it, inserted] = gold.try_emplace(s);
    if (inserted) order.push_back(s);
    it->second.push_back(t);
  }

  BliResult result;
  result.k = k;
  SharedSpace source = shared_space(model, src, spaces);
  NeighborIndex index(model, tgt, spaces);
  std::size_t hits = 0;
  for (const auto& word : order) {
    std::vector<std::string> targets;
    for (const auto& t : gold[word])
      if (tgt_it->second.contains(t)) targets.push_back(t);
    auto q = source.lookup(word);
    if (!q || targets.empty()) {
      ++result.excluded;
      continue;
    }
    BliWordResult wr;
    wr.word = word;
    wr.gold = targets;
    wr.neighbors = index.search(*q, k, src == tgt ? &word : nullptr);
    wr.neighbors.query_word = word;
    wr.neighbors.query_lang = src;
    for (const auto& n : wr.neighbors.neighbors)
      if (std::find(targets.begin(), targets.end(), n.word) != targets.end()) wr.hit = true;
    hits += wr.hit ? 1 : 0;
    result.per_word.push_back(std::move(wr));
  }
  result.evaluated = result.per_word.size();
  if (result.evaluated == 0)
    throw Error(ErrorKind::InsufficientData,
                "no " + src + "->" + tgt + " validation pair is inside both vocabularies");
  result.precision = static_cast<double>(hits) / static_cast<double>(result.evaluated);
  return result;
}

nlohmann::ordered_json to_json(const NeighborList& list, const std::string& target_lang) {
  nlohmann::ordered_json j;
  j["query"] = list.query_word;
  j["lang"] = list.query_lang;
  j["target"] = target_lang;
  auto& arr = j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& n : list.neighbors)
    arr.push_back({{"word", n.word}, {"lang", n.language}, {"score", n.score}});
  j["truncated"] = list.truncated;
  return j;
}

nlohmann::ordered_json bli_summary_json(const BliResult& result, const BilingualLexicon& validation) {
  nlohmann::ordered_json j;
  j["summary"] = "bli";
  j["src"] = validation.src_lang();
  j["tgt"] = validation.tgt_lang();
  j["k"] = result.k;
  j["precision"] = result.precision;
  j["evaluated"] = result.evaluated;
  j["excluded"] = result.excluded;
  return j;
}

}  // namespace xlemb
