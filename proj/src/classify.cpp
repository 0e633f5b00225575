#include "xlemb/classify.hpp"

#include <cmath>
#include <random>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

Featurized featurize(const Tokens& doc, const SharedSpace& space) {
  Featurized out;
  out.vector = Eigen::VectorXd::Zero(space.vectors.cols());
  std::size_t known = 0;
  for (const auto& tok : doc) {
    auto idx = space.source->index_of(tok);
    if (!idx) continue;
    out.vector += space.vectors.row(static_cast<Eigen::Index>(*idx)).transpose();
    ++known;
  }
  if (known == 0)
    out.all_oov = true;
  else
    out.vector /= static_cast<double>(known);
  return out;
}

Featurized featurize(const Tokens& doc, const AlignmentModel& model, const SpaceSet& spaces,
                     const std::string& language) {
  return featurize(doc, shared_space(model, language, spaces));
}

FeatureMatrix featurize_dataset(const LabeledDataset& ds, const SharedSpace& space) {
  FeatureMatrix fm;
  fm.features.resize(ds.docs.size(), space.vectors.cols());
  fm.labels.reserve(ds.docs.size());
  for (std::size_t i = 0; i < ds.docs.size(); ++i) {
    Featurized f = featurize(ds.docs[i].tokens, space);
    fm.features.row(i) = f.vector.transpose();
    fm.all_oov += f.all_oov ? 1 : 0;
    fm.labels.push_back(ds.docs[i].label == Label::Hate ? 1 : 0);
  }
  return fm;
}

void validate(const LogRegConfig& cfg) {
  if (cfg.epochs < 1) throw Error(ErrorKind::Config, "classify.epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorKind::Config, "classify.lr must be > 0");
  if (!(cfg.l2 >= 0.0)) throw Error(ErrorKind::Config, "classify.l2 must be >= 0");
  if (!(cfg.init_jitter >= 0.0)) throw Error(ErrorKind::Config, "classify.init_jitter must be >= 0");
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_shapes(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw Error(ErrorKind::Dimension, std::to_string(X.rows()) + " feature rows but " +
                                          std::to_string(y.size()) + " labels");
}

}  // namespace

double ClassifierModel::probability(const Eigen::VectorXd& x) const {
  return sigmoid(weights.dot(x) + bias);
}

double logistic_loss(const Eigen::VectorXd& weights, double bias, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, double l2) {
  check_shapes(X, y);
  Eigen::VectorXd z = (X * weights).array() + bias;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    total += y[i] ? softplus(-z(i)) : softplus(z(i));
  return total / static_cast<double>(z.size()) + 0.5 * l2 * weights.squaredNorm();
}

ClassifierModel train_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             const LogRegConfig& cfg) {
  validate(cfg);
  check_shapes(X, y);
  std::size_t positives = 0;
  for (int label : y) {
    if (label != 0 && label != 1) throw Error(ErrorKind::Domain, "labels must be 0 or 1");
    positives += static_cast<std::size_t>(label);
  }
  if (y.size() < 2 || positives == 0 || positives == y.size())
    throw Error(ErrorKind::DegenerateData, "training data must contain both classes");

  ClassifierModel model;
  model.config = cfg;
  model.weights = Eigen::VectorXd::Zero(X.cols());
  if (cfg.init_jitter > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      model.weights(j) = (static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0) * cfg.init_jitter;
  }

  const double n = static_cast<double>(y.size());
  Eigen::VectorXd target(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) target(i) = y[i];
  model.loss_history.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Eigen::VectorXd z = (X * model.weights).array() + model.bias;
    Eigen::VectorXd residual = z.unaryExpr([](double v) { return sigmoid(v); }) - target;
    Eigen::VectorXd grad_w = X.transpose() * residual / n + cfg.l2 * model.weights;
    double grad_b = residual.sum() / n;
    model.weights -= cfg.learning_rate * grad_w;
    model.bias -= cfg.learning_rate * grad_b;
    model.loss_history.push_back(logistic_loss(model.weights, model.bias, X, y, cfg.l2));
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias))
    throw Error(ErrorKind::Domain, "logistic regression diverged; lower classify.lr");
  return model;
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  // 2PR/(P+R) rewritten over counts; zero when tp == 0.
  m.f1 = tp > 0 ? static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn) : 0.0;
  std::size_t total = tp + fp + fn + tn;
  m.accuracy = total > 0 ? static_cast<double>(tp + tn) / static_cast<double>(total) : 0.0;
  return m;
}

Metrics evaluate(const ClassifierModel& model, const Eigen::MatrixXd& X, const std::vector<int>& y,
                 double threshold) {
  check_shapes(X, y);
  if (X.cols() != model.weights.size())
    throw Error(ErrorKind::Dimension, "features have dimension " + std::to_string(X.cols()) +
                                          ", model expects " + std::to_string(model.weights.size()));
  if (!(threshold > 0.0 && threshold < 1.0))
    throw Error(ErrorKind::Config, "classify.threshold must lie in (0, 1)");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    bool predicted = model.probability(X.row(i).transpose()) >= threshold;
    bool actual = y[i] == 1;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

Metrics zero_shot_eval(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                       const AlignmentModel& model, const SpaceSet& spaces,
                       const ZeroShotConfig& cfg) {
  if (train_ds.language == test_ds.language && !cfg.monolingual)
    throw Error(ErrorKind::Protocol, "train and test language are both " + train_ds.language +
                                         "; enable monolingual mode for same-language runs");
  FeatureMatrix train = featurize_dataset(train_ds, shared_space(model, train_ds.language, spaces));
  ClassifierModel clf = train_logreg(train.features, train.labels, cfg.logreg);
  clf.language = train_ds.language;
  FeatureMatrix test = featurize_dataset(test_ds, shared_space(model, test_ds.language, spaces));
  return evaluate(clf, test.features, test.labels, cfg.threshold);
}

nlohmann::ordered_json to_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  return j;
}

std::string to_tsv_row(const Metrics& m, const std::string& train_lang, const std::string& test_lang) {
  std::string row = train_lang + '\t' + test_lang;
  for (double v : {m.precision, m.recall, m.f1, m.accuracy}) {
    row += '\t';
    append_fixed(row, v, 4);
  }
  for (std::size_t c : {m.tp, m.fp, m.fn, m.tn}) row += '\t' + std::to_string(c);
  return row;
}

}  // namespace xlemb
