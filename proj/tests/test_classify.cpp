#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "support/testutil.hpp"
#include "xlemb/classify.hpp"

using namespace xlemb;
using testutil::error_kind;

namespace {

struct Toy {
  EmbeddingSpace space;
  Eigen::MatrixXd vectors;
  SharedSpace shared() const { return SharedSpace{space.language(), &space, vectors}; }
};

Eigen::MatrixXd separable(std::vector<int>& y) {
  Eigen::MatrixXd X(40, 3);
  testutil::Gen g(21);
  y.clear();
  for (int i = 0; i < 40; ++i) {
    X.row(i) = g.matrix(1, 3);
    y.push_back(X(i, 0) + 0.5 * X(i, 1) > 0 ? 1 : 0);
  }
  return X;
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("featurize means in-vocabulary vectors") {
    Eigen::MatrixXd v(3, 2);
    v << 1, 2, 3, 4, 5, 9;
    Toy t{EmbeddingSpace("en", {"a", "b", "c"}, v.cast<float>()), v};
    auto one = featurize({"b"}, t.shared());
    CHECK(one.vector == v.row(1).transpose());
    CHECK_FALSE(one.all_oov);
    auto three = featurize({"a", "b", "c", "oov"}, t.shared());
    CHECK(three.vector(0) == doctest::Approx(3.0));
    CHECK(three.vector(1) == doctest::Approx(5.0));
    auto none = featurize({"x", "y"}, t.shared());
    CHECK(none.all_oov);
    CHECK(none.vector == Eigen::VectorXd::Zero(2));
    CHECK(featurize({}, t.shared()).all_oov);
  }

  TEST_CASE("zero weights predict one half") {
    ClassifierModel m;
    m.weights = Eigen::VectorXd::Zero(4);
    CHECK(m.probability(Eigen::VectorXd::Random(4)) == 0.5);
  }

  TEST_CASE("two separable points are fit perfectly") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, -1, 0;
    std::vector<int> y{1, 0};
    auto m = train_logreg(X, y, {});
    auto met = evaluate(m, X, y);
    CHECK(met.f1 == 1.0);
  }

  TEST_CASE("loss is non-increasing with a small step") {
    auto pr = fixtures::make_planted_rule({.space = {}, .docs_per_language = 300});
    auto model = fit_hub_alignment(pr.tri.spaces, pr.tri.train, AlignmentConfig{});
    auto fm = featurize_dataset(pr.datasets.at("en"), shared_space(model, "en", pr.tri.spaces));
    LogRegConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.epochs = 300;
    auto m = train_logreg(fm.features, fm.labels, cfg);
    for (std::size_t i = 1; i < m.loss_history.size(); ++i)
      CHECK(m.loss_history[i] <= m.loss_history[i - 1] + 1e-15);
  }

  TEST_CASE("degenerate training data") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
    CHECK(error_kind([&] { train_logreg(X, {1, 1, 1}, {}); }) == ErrorKind::DegenerateData);
    CHECK(error_kind([&] { train_logreg(X, {1, 0}, {}); }) == ErrorKind::Dimension);
    LogRegConfig bad;
    bad.l2 = -1;
    CHECK(error_kind([&] { train_logreg(X, {1, 0, 1}, bad); }) == ErrorKind::Config);
  }

  TEST_CASE("metric arithmetic") {
    auto m = metrics_from_counts(2, 1, 1, 6);
    CHECK(m.precision == 2.0 / 3.0);
    CHECK(m.recall == 2.0 / 3.0);
    CHECK(m.f1 == 2.0 / 3.0);
    CHECK(m.accuracy == 0.8);
    auto zero = metrics_from_counts(0, 3, 2, 5);
    CHECK(zero.f1 == 0.0);
    CHECK(zero.precision == 0.0);
    CHECK(metrics_from_counts(0, 0, 0, 4).recall == 0.0);
    CHECK(metrics_from_counts(5, 0, 0, 5).f1 == 1.0);
  }

  TEST_CASE("metric invariants over random counts") {
    testutil::Gen g(22);
    for (int trial = 0; trial < 2000; ++trial) {
      std::size_t tp = g.index(20), fp = g.index(20), fn = g.index(20), tn = g.index(20);
      auto m = metrics_from_counts(tp, fp, fn, tn);
      CHECK(m.f1 >= 0.0);
      CHECK(m.f1 <= 1.0);
      CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
      CHECK((m.f1 == 0.0) == (tp == 0));
      if (m.precision + m.recall > 0)
        CHECK(std::abs(m.f1 - 2 * m.precision * m.recall / (m.precision + m.recall)) < 1e-12);
      CHECK(m.tp + m.fp + m.fn + m.tn == tp + fp + fn + tn);
    }
  }

  TEST_CASE("evaluate checks its inputs") {
    std::vector<int> y;
    Eigen::MatrixXd X = separable(y);
    auto m = train_logreg(X, y, {});
    CHECK(error_kind([&] { evaluate(m, Eigen::MatrixXd::Ones(2, 5), {0, 1}); }) == ErrorKind::Dimension);
    CHECK(error_kind([&] { evaluate(m, X, y, 1.0); }) == ErrorKind::Config);
    auto met = evaluate(m, X, y);
    CHECK(met.tp + met.fp + met.fn + met.tn == 40);
  }

  TEST_CASE("positive rescaling keeps predictions") {
    std::vector<int> y;
    Eigen::MatrixXd X = separable(y);
    auto m = train_logreg(X, y, {});
    auto scaled = m;
    for (double a : {0.01, 0.5, 3.0, 100.0}) {
      scaled.weights = m.weights * a;
      scaled.bias = m.bias * a;
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        CHECK((m.probability(X.row(i).transpose()) >= 0.5) ==
              (scaled.probability(X.row(i).transpose()) >= 0.5));
    }
  }

  TEST_CASE("l2 shrinks the weights") {
    std::vector<int> y;
    Eigen::MatrixXd X = separable(y);
    LogRegConfig free_cfg, reg_cfg;
    reg_cfg.l2 = 10.0;
    CHECK(train_logreg(X, y, reg_cfg).weights.norm() < train_logreg(X, y, free_cfg).weights.norm());
  }

  TEST_CASE("jittered init is seeded") {
    std::vector<int> y;
    Eigen::MatrixXd X = separable(y);
    LogRegConfig cfg;
    cfg.init_jitter = 0.01;
    cfg.epochs = 5;
    CHECK(train_logreg(X, y, cfg).weights == train_logreg(X, y, cfg).weights);
    auto other = cfg;
    other.seed = 2;
    CHECK_FALSE(train_logreg(X, y, other).weights == train_logreg(X, y, cfg).weights);
  }

  TEST_CASE("zero-shot protocol") {
    auto pr = fixtures::make_planted_rule({.space = {}, .docs_per_language = 400});
    auto model = fit_hub_alignment(pr.tri.spaces, pr.tri.train, AlignmentConfig{});
    ZeroShotConfig cfg;
    cfg.logreg.learning_rate = 20.0;
    cfg.logreg.epochs = 300;
    const auto& en = pr.datasets.at("en");
    const auto& es = pr.datasets.at("es");
    CHECK(error_kind([&] { zero_shot_eval(en, en, model, pr.tri.spaces, cfg); }) == ErrorKind::Protocol);
    auto a = zero_shot_eval(en, es, model, pr.tri.spaces, cfg);
    auto b = zero_shot_eval(en, es, model, pr.tri.spaces, cfg);
    CHECK(a.f1 == b.f1);
    CHECK(a.tp == b.tp);
    CHECK(a.tp + a.fp + a.fn + a.tn == es.docs.size());
    cfg.monolingual = true;
    CHECK_NOTHROW(zero_shot_eval(en, en, model, pr.tri.spaces, cfg));
  }

  TEST_CASE("json and tsv records") {
    auto m = metrics_from_counts(2, 1, 1, 6);
    auto j = to_json(m);
    CHECK(j["tp"] == 2);
    CHECK(to_tsv_row(m, "es", "en") == "es\ten\t0.6667\t0.6667\t0.6667\t0.8000\t2\t1\t1\t6");
  }
}
