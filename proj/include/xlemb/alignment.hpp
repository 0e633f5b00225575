#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xlemb/embedding_store.hpp"
#include "xlemb/lexicon.hpp"

namespace xlemb {

// Canonical correlation analysis of paired samples (row i of X with row i of
// Y). Canonical coordinates of a centered row x are x * proj_src.
struct CcaResult {
  Eigen::MatrixXd proj_src;      // d1 x k
  Eigen::MatrixXd proj_tgt;      // d2 x k
  Eigen::VectorXd correlations;  // length k, descending
  Eigen::RowVectorXd means_src;
  Eigen::RowVectorXd means_tgt;
};

// Covariances are centered and divided by n; `lambda` is added to the
// diagonal of both auto-covariances. Keeps ceil(kept_ratio * min(d1, d2))
// directions, capped at n.
CcaResult fit_cca(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda,
                  double kept_ratio);

// Symmetric inverse square root of a symmetric positive definite matrix.
// Throws Error(Singularity) when an eigenvalue is not clearly positive.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& A);

// Moore-Penrose pseudo-inverse; singular values below 1e-10 * max are zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& A);

struct AlignmentConfig {
  std::string pivot = "en";
  double lambda = 1e-3;
  double kept_ratio = 0.8;
  // Length-normalize every vector before it enters the covariance estimate
  // and before projection.
  bool normalize = true;
};

void validate(const AlignmentConfig& cfg);

// Affine map of one language into the shared space:
//   shared = (v - mean) * projection * back_map + pivot_mean
// The pivot language carries no matrices and maps by identity.
struct LanguageMap {
  std::size_t dim = 0;
  bool identity = false;
  Eigen::RowVectorXd mean;        // 1 x dim
  Eigen::MatrixXd projection;     // dim x k
  Eigen::MatrixXd back_map;       // k x shared_dim
  Eigen::RowVectorXd pivot_mean;  // 1 x shared_dim
  Eigen::VectorXd correlations;   // length k, for reporting
};

class AlignmentModel {
 public:
  AlignmentModel(AlignmentConfig config, std::map<std::string, LanguageMap> maps);

  const AlignmentConfig& config() const { return config_; }
  const std::string& pivot() const { return config_.pivot; }
  std::size_t shared_dim() const { return shared_dim_; }
  std::vector<std::string> languages() const;
  bool has_language(const std::string& lang) const { return maps_.count(lang) != 0; }
  // Throws Error(Config) for unknown languages.
  const LanguageMap& map_for(const std::string& lang) const;

  // Maps raw vectors of `lang` (one per row) into the shared space.
  Eigen::MatrixXd transform(const std::string& lang, const Eigen::MatrixXd& rows) const;

 private:
  AlignmentConfig config_;
  std::map<std::string, LanguageMap> maps_;
  std::size_t shared_dim_ = 0;
};

// Fits one CCA per non-pivot language against the pivot using `lexicons`
// (each with src_lang == pivot) restricted to the spaces' vocabularies.
AlignmentModel fit_hub_alignment(const SpaceSet& spaces,
                                 const std::vector<BilingualLexicon>& lexicons,
                                 const AlignmentConfig& cfg);

// Shared-space vector of one word. Error(NotFound) for OOV words,
// Error(Config) for languages the model does not know.
Eigen::VectorXd project(const AlignmentModel& model, const std::string& word,
                        const std::string& language, const SpaceSet& spaces);

// Every word of one language in the shared space, rows in vocabulary order.
struct SharedSpace {
  std::string language;
  const EmbeddingSpace* source = nullptr;
  Eigen::MatrixXd vectors;

  // Row for `word`, or nullopt when it is out of vocabulary.
  std::optional<Eigen::VectorXd> lookup(const std::string& word) const;
};

SharedSpace shared_space(const AlignmentModel& model, const std::string& language,
                         const SpaceSet& spaces);

// Directory layout: `alignment.meta` (key = value lines) and one
// `<lang>.matrices` file per non-pivot language holding the blocks mean,
// projection, back_map, pivot_mean and correlations, each preceded by a
// "<rows> <cols>" header.
void save_alignment(const AlignmentModel& model, const std::filesystem::path& dir);
AlignmentModel load_alignment(const std::filesystem::path& dir);

}  // namespace xlemb
