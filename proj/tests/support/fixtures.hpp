#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlemb/alignment.hpp"
#include "xlemb/corpus.hpp"
#include "xlemb/embedding_store.hpp"
#include "xlemb/lexicon.hpp"
#include "xlemb/rules.hpp"

namespace xlemb::fixtures {

Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, double sd, std::mt19937_64& rng);
Eigen::MatrixXd random_orthogonal(std::size_t d, std::mt19937_64& rng);

// "en0007": word 7 of language en.
std::string word(const std::string& lang, std::size_t index);

EmbeddingSpace make_space(const std::string& lang, const Eigen::MatrixXd& rows);

// One shared proto-space; each language sees it through its own random
// orthogonal map plus Gaussian noise. Word i of every language is the same
// proto word. Lexicons run from the first language to each other one.
struct TrilingualSpec {
  std::vector<std::string> languages{"en", "es", "it"};
  std::size_t words = 500;
  std::size_t dim = 50;
  double noise = 0.01;
  std::size_t train_pairs = 150;
  std::size_t validation_pairs = 100;
  std::uint64_t seed = 42;
  // Proto coordinate j has scale exp(-decay * j / dim), rescaled so rows have
  // unit expected norm. 0 gives an isotropic space.
  double decay = 5.0;
};

struct Trilingual {
  Eigen::MatrixXd proto;  // words x dim, rows of unit scale
  SpaceSet spaces;
  std::vector<BilingualLexicon> train;  // pivot -> lang
  std::vector<std::size_t> validation_ids;  // proto rows held out from training
  BilingualLexicon validation(const std::string& src, const std::string& tgt) const;
};

Trilingual make_trilingual(const TrilingualSpec& spec = {});

// Labeled bag-of-words documents over a trilingual fixture. A document is
// hate when the mean proto vector of its words lies on the positive side of
// a fixed random hyperplane through the origin.
struct PlantedRuleSpec {
  TrilingualSpec space;
  std::size_t docs_per_language = 2000;
  std::size_t doc_length = 8;
  std::uint64_t seed = 11;
};

struct PlantedRule {
  Trilingual tri;
  Eigen::VectorXd direction;
  std::map<std::string, LabeledDataset> datasets;
};

PlantedRule make_planted_rule(const PlantedRuleSpec& spec = {});

// SGNS corpus with `pairs` planted pairs p<i>/q<i>. Every sentence of pair i
// holds p<i> and q<i> side by side among fillers private to the pair and a
// few shared generic fillers. z0 only occurs among generic fillers.
struct PairedCorpus {
  std::vector<Tokens> corpus;
  std::vector<std::pair<std::string, std::string>> planted;
};

PairedCorpus make_paired_corpus(std::size_t pairs = 20, std::size_t sentences_per_pair = 60,
                                std::uint64_t seed = 3);

// Two languages with identical topic statistics. Topic g has an anchor that
// occurs in every topic document and four context words with topic-specific
// rates; all topic documents are hate. Spaces are a rotated proto-space, so
// the fitted alignment is close to exact.
struct ContextFixture {
  SpaceSet spaces;
  AlignmentModel model;
  std::map<std::string, LabeledDataset> datasets;
  std::vector<std::pair<std::string, std::string>> planted;  // en anchor -> es anchor
};

ContextFixture make_context_fixture(std::size_t topics = 8, std::uint64_t seed = 5);

// Paired samples plus canonical correlations frozen from the scipy oracle
// (scripts/cca_oracle.py).
struct CcaFixture {
  Eigen::MatrixXd X, Y;
  Eigen::VectorXd expected;
};

std::filesystem::path test_data_dir();
CcaFixture load_cca_fixture(const std::string& name);

// Second route to canonical correlations, the generalized symmetric
// eigenproblem Cxy Cyy^-1 Cyx v = rho^2 Cxx v (no regularization).
Eigen::VectorXd eigen_oracle_correlations(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// Exhaustive {x} => {u} enumeration over (top-n word x vocabulary) pairs,
// counting documents by linear scans. Output order follows mine_rules.
std::vector<AssociationRule> brute_force_rules(const std::vector<Tokens>& docs, const MiningConfig& cfg);

// Random corpus of 1..max_docs documents over a small vocabulary.
std::vector<Tokens> random_corpus(std::mt19937_64& rng, std::size_t max_docs);

// Raw inputs for the CLI pipeline: corpus.<lang>.txt, seeds.txt,
// lexicon.<lang>.tsv (en -> lang) and dataset.<lang>.tsv for en, es, it.
void write_pipeline_fixtures(const std::filesystem::path& dir, std::uint64_t seed = 1);

}  // namespace xlemb::fixtures
