#include "xlemb/context_similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xlemb/error.hpp"

namespace xlemb {

std::string_view to_string(SimVariant v) { return v == SimVariant::Literal ? "literal" : "bounded"; }

SimVariant parse_sim_variant(std::string_view s) {
  if (s == "literal") return SimVariant::Literal;
  if (s == "bounded") return SimVariant::Bounded;
  throw Error(ErrorKind::Config, "similarity.variant must be 'literal' or 'bounded', got '" +
                                     std::string(s) + "'");
}

namespace {

void check_unit(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0))
    throw Error(ErrorKind::Domain, std::string(what) + " " + std::to_string(value) +
                                       " lies outside [0, 1]");
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

double met_sim(const ContextEntry& u, const ContextEntry& v, SimVariant variant) {
  check_unit(u.support, "support");
  check_unit(v.support, "support");
  check_unit(u.confidence, "confidence");
  check_unit(v.confidence, "confidence");
  const double dsupp = std::abs(u.support - v.support);
  const double dconf = std::abs(u.confidence - v.confidence);
  if (variant == SimVariant::Literal) return 1.0 - dsupp / 2.0 + dconf / 2.0;
  return 1.0 - (dsupp + dconf) / 2.0;
}

double word_sim(const ContextEntry& u_entry, const ContextEntry& v_entry,
                const Eigen::VectorXd& u_vec, const Eigen::VectorXd& v_vec, SimVariant variant) {
  return (cosine(as_span(u_vec), as_span(v_vec)) + met_sim(u_entry, v_entry, variant)) / 2.0;
}

double word_sim(const std::string& u, const std::string& v, const WordContext& context_u,
                const WordContext& context_v, const SharedSpace& space_u,
                const SharedSpace& space_v, SimVariant variant) {
  auto eu = context_u.entries.find(u);
  auto ev = context_v.entries.find(v);
  if (eu == context_u.entries.end())
    throw Error(ErrorKind::Domain, "'" + u + "' is not in the context of '" + context_u.word + "'");
  if (ev == context_v.entries.end())
    throw Error(ErrorKind::Domain, "'" + v + "' is not in the context of '" + context_v.word + "'");
  auto vu = space_u.lookup(u);
  auto vv = space_v.lookup(v);
  if (!vu) throw Error(ErrorKind::NotFound, "no shared vector for " + space_u.language + " '" + u + "'");
  if (!vv) throw Error(ErrorKind::NotFound, "no shared vector for " + space_v.language + " '" + v + "'");
  return word_sim(eu->second, ev->second, *vu, *vv, variant);
}

namespace {

struct Resolved {
  std::vector<ContextEntry> entries;
  std::vector<Eigen::VectorXd> vectors;
  std::size_t skipped = 0;
};

Resolved resolve(const WordContext& ctx, const SharedSpace& space) {
  Resolved r;
  for (const auto& [word, entry] : ctx.entries) {
    auto v = space.lookup(word);
    if (!v) {
      ++r.skipped;
      continue;
    }
    r.entries.push_back(entry);
    r.vectors.push_back(std::move(*v));
  }
  return r;
}

}  // namespace

ContextSimResult context_sim(const WordContext& x, const WordContext& y, const SharedSpace& space_x,
                             const SharedSpace& space_y, SimVariant variant) {
  if (x.empty()) throw Error(ErrorKind::InsufficientData, "empty context for '" + x.word + "'");
  if (y.empty()) throw Error(ErrorKind::InsufficientData, "empty context for '" + y.word + "'");
  Resolved a = resolve(x, space_x);
  Resolved b = resolve(y, space_y);
  if (a.entries.empty() || b.entries.empty())
    throw Error(ErrorKind::InsufficientData, "no context word of '" +
                                                 (a.entries.empty() ? x.word : y.word) +
                                                 "' has a shared-space vector");

  // sim table, rows over A and columns over B.
  Eigen::MatrixXd table(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    for (std::size_t j = 0; j < b.entries.size(); ++j)
      table(i, j) = word_sim(a.entries[i], b.entries[j], a.vectors[i], b.vectors[j], variant);

  const double a_to_b = table.rowwise().maxCoeff().mean();
  const double b_to_a = table.colwise().maxCoeff().mean();
  return {(a_to_b + b_to_a) / 2.0, a.skipped + b.skipped};
}

namespace {

const std::set<std::string>& stopwords_for(const ReportConfig& cfg, const std::string& lang) {
  auto it = cfg.stopwords.find(lang);
  return it != cfg.stopwords.end() ? it->second : cfg.mining.stopwords;
}

}  // namespace

std::vector<ReportRecord> cross_lingual_report(const std::vector<SeedTerm>& seeds,
                                               const std::map<std::string, LabeledDataset>& datasets,
                                               const AlignmentModel& model, const SpaceSet& spaces,
                                               const ReportConfig& cfg) {
  validate(cfg.mining);
  if (cfg.top_m < 1) throw Error(ErrorKind::Config, "similarity.top_m must be >= 1");

  std::map<std::string, std::vector<Tokens>> partitions;
  std::map<std::string, SharedSpace> shared;
  std::map<std::string, std::vector<WordContext>> candidates;
  auto prepare = [&](const std::string& lang) {
    if (partitions.count(lang)) return;
    auto ds = datasets.find(lang);
    if (ds == datasets.end()) throw Error(ErrorKind::Config, "no dataset for language " + lang);
    partitions[lang] = ds->second.partition(cfg.class_filter);
    shared.emplace(lang, shared_space(model, lang, spaces));
  };
  auto target_contexts = [&](const std::string& lang) -> const std::vector<WordContext>& {
    auto it = candidates.find(lang);
    if (it != candidates.end()) return it->second;
    prepare(lang);
    MiningConfig mining = cfg.mining;
    mining.stopwords = stopwords_for(cfg, lang);
    std::vector<WordContext> contexts;
    const auto& docs = partitions[lang];
    if (!docs.empty()) {
      auto terms = top_terms(docs, mining.top_n_antecedents, mining.stopwords);
      auto rules = mine_rules_for(docs, terms, mining);
      for (const auto& t : terms) {
        WordContext ctx = build_context(rules, t);
        if (!ctx.empty()) contexts.push_back(std::move(ctx));
      }
    }
    return candidates.emplace(lang, std::move(contexts)).first->second;
  };

  std::vector<ReportRecord> out;
  for (const auto& seed : seeds) {
    prepare(seed.language);
    MiningConfig mining = cfg.mining;
    mining.stopwords = stopwords_for(cfg, seed.language);
    const auto& docs = partitions[seed.language];
    WordContext seed_ctx;
    seed_ctx.word = seed.word;
    if (!docs.empty()) seed_ctx = build_context(mine_rules_for(docs, {seed.word}, mining), seed.word);

    for (const auto& [lang, ds] : datasets) {
      if (lang == seed.language || !model.has_language(lang)) continue;
      ReportRecord rec;
      rec.seed = seed;
      rec.target_lang = lang;
      rec.class_filter = cfg.class_filter;
      rec.variant = cfg.variant;
      rec.has_context = !seed_ctx.empty();
      if (rec.has_context) {
        for (const auto& ctx : target_contexts(lang)) {
          try {
            auto r = context_sim(seed_ctx, ctx, shared.at(seed.language), shared.at(lang),
                                 cfg.variant);
            rec.terms.push_back({ctx.word, r.score});
            rec.skipped += r.skipped;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientData) throw;
          }
        }
        std::sort(rec.terms.begin(), rec.terms.end(), [](const auto& a, const auto& b) {
          if (a.score != b.score) return a.score > b.score;
          return a.word < b.word;
        });
        if (rec.terms.size() > cfg.top_m) rec.terms.resize(cfg.top_m);
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const ReportRecord& record) {
  nlohmann::ordered_json j;
  j["seed"] = record.seed.word;
  j["source_lang"] = record.seed.language;
  j["target_lang"] = record.target_lang;
  j["class"] = std::string(to_string(record.class_filter));
  j["variant"] = std::string(to_string(record.variant));
  j["status"] = record.has_context ? "ok" : "no context";
  auto& terms = j["terms"] = nlohmann::ordered_json::array();
  for (const auto& t : record.terms) terms.push_back({{"word", t.word}, {"score", t.score}});
  j["skipped"] = record.skipped;
  return j;
}

}  // namespace xlemb
