#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "xlemb/alignment.hpp"
#include "xlemb/rules.hpp"

namespace xlemb {

struct Featurized {
  Eigen::VectorXd vector;
  bool all_oov = false;
};

// Mean shared-space vector of the in-vocabulary tokens; zero vector with
// all_oov set when no token is known.
Featurized featurize(const Tokens& doc, const SharedSpace& space);
Featurized featurize(const Tokens& doc, const AlignmentModel& model, const SpaceSet& spaces,
                     const std::string& language);

struct FeatureMatrix {
  Eigen::MatrixXd features;  // one row per document
  std::vector<int> labels;   // 1 = hate
  std::size_t all_oov = 0;
};

FeatureMatrix featurize_dataset(const LabeledDataset& ds, const SharedSpace& space);

struct LogRegConfig {
  std::size_t epochs = 500;
  double learning_rate = 0.1;
  double l2 = 0.0;
  std::uint64_t seed = 1;
  // Uniform init in [-jitter, jitter]; 0 starts from all-zero weights.
  double init_jitter = 0.0;
};

void validate(const LogRegConfig& cfg);

struct ClassifierModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::string language;
  LogRegConfig config;
  std::vector<double> loss_history;  // regularized loss after each epoch

  double probability(const Eigen::VectorXd& x) const;
};

// Mean logistic loss plus (l2 / 2) * |w|^2; the bias is not regularized.
double logistic_loss(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, double l2);

// Full-batch gradient descent. Throws Error(DegenerateData) unless both
// classes are present.
ClassifierModel train_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             const LogRegConfig& cfg);

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Hate is the positive class; zero denominators yield 0.
Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

// Predicts hate when probability >= threshold.
Metrics evaluate(const ClassifierModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                 double threshold = 0.5);

struct ZeroShotConfig {
  LogRegConfig logreg;
  double threshold = 0.5;
  // Allows train and test data from the same language.
  bool monolingual = false;
};

// Trains on `train_ds` only, then scores `test_ds` in its own language.
Metrics zero_shot_eval(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                       const AlignmentModel& model, const SpaceSet& spaces,
                       const ZeroShotConfig& cfg);

nlohmann::ordered_json to_json(const Metrics& m);
std::string to_tsv_row(const Metrics& m, const std::string& train_lang, const std::string& test_lang);

}  // namespace xlemb
