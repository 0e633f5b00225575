#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "xlemb/alignment.hpp"
#include "xlemb/rules.hpp"

namespace xlemb {

// How the support/confidence agreement of two context words is scored.
//   literal: 1 - |dsupp|/2 + |dconf|/2   (range [0.5, 1.5])
//   bounded: 1 - (|dsupp| + |dconf|)/2   (range [0, 1])
enum class SimVariant { Literal, Bounded };

std::string_view to_string(SimVariant v);
SimVariant parse_sim_variant(std::string_view s);

// Throws Error(Domain) when a support or confidence lies outside [0, 1].
double met_sim(const ContextEntry& u, const ContextEntry& v, SimVariant variant);

// Mean of the shared-space cosine and met_sim.
double word_sim(const ContextEntry& u_entry, const ContextEntry& v_entry,
                const Eigen::VectorXd& u_vec, const Eigen::VectorXd& v_vec, SimVariant variant);

// Looks u and v up in their contexts and shared spaces. Error(NotFound) for
// a missing vector, Error(Domain) for a missing context entry.
double word_sim(const std::string& u, const std::string& v, const WordContext& context_u,
                const WordContext& context_v, const SharedSpace& space_u,
                const SharedSpace& space_v, SimVariant variant);

struct ContextSimResult {
  double score = 0.0;
  // Context words without a shared-space vector, left out of the max/mean.
  std::size_t skipped = 0;
};

// Symmetric mean-of-max similarity of two contexts:
//   1/2 (mean_{u in A} max_{v in B} sim(u,v) + mean_{v in B} max_{u in A} sim(u,v))
ContextSimResult context_sim(const WordContext& x, const WordContext& y, const SharedSpace& space_x,
                             const SharedSpace& space_y, SimVariant variant);

struct SeedTerm {
  std::string word;
  std::string language;
};

struct ReportConfig {
  MiningConfig mining;
  // Stopwords per language, used in place of mining.stopwords when present.
  std::map<std::string, std::set<std::string>> stopwords;
  std::size_t top_m = 3;
  SimVariant variant = SimVariant::Literal;
  Label class_filter = Label::Hate;
};

struct ScoredTerm {
  std::string word;
  double score = 0.0;
};

struct ReportRecord {
  SeedTerm seed;
  std::string target_lang;
  Label class_filter = Label::Hate;
  SimVariant variant = SimVariant::Literal;
  bool has_context = false;
  std::vector<ScoredTerm> terms;
  std::size_t skipped = 0;
};

// For every seed and every other dataset language: mine the seed's context
// in its own class partition, mine contexts for the target partition's top
// terms, and rank them by context_sim (score desc, then word).
std::vector<ReportRecord> cross_lingual_report(const std::vector<SeedTerm>& seeds,
                                               const std::map<std::string, LabeledDataset>& datasets,
                                               const AlignmentModel& model, const SpaceSet& spaces,
                                               const ReportConfig& cfg);

nlohmann::ordered_json to_json(const ReportRecord& record);

}  // namespace xlemb
