#include "fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "xlemb/error.hpp"

namespace xlemb::fixtures {

Eigen::MatrixXd gaussian(std::size_t rows, std::size_t cols, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Eigen::MatrixXd random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  Eigen::MatrixXd a = gaussian(d, d, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix so Q is uniformly distributed.
  for (std::size_t j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

std::string word(const std::string& lang, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return lang + buf;
}

EmbeddingSpace make_space(const std::string& lang, const Eigen::MatrixXd& rows) {
  std::vector<std::string> words;
  RowMatrixF vectors = rows.cast<float>();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) words.push_back(word(lang, i));
  return EmbeddingSpace(lang, std::move(words), std::move(vectors));
}

namespace {

std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(ids[i - 1], ids[rng() % i]);
  return ids;
}

BilingualLexicon id_lexicon(const std::string& src, const std::string& tgt,
                            const std::vector<std::size_t>& ids) {
  std::vector<WordPair> pairs;
  for (auto i : ids) pairs.emplace_back(word(src, i), word(tgt, i));
  return BilingualLexicon(src, tgt, std::move(pairs));
}

}  // namespace

BilingualLexicon Trilingual::validation(const std::string& src, const std::string& tgt) const {
  return id_lexicon(src, tgt, validation_ids);
}

Trilingual make_trilingual(const TrilingualSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  Trilingual t;
  t.proto = gaussian(spec.words, spec.dim, 1.0, rng);
  Eigen::VectorXd scale(spec.dim);
  for (std::size_t j = 0; j < spec.dim; ++j)
    scale(j) = std::exp(-spec.decay * static_cast<double>(j) / static_cast<double>(spec.dim));
  scale /= scale.norm();
  t.proto = t.proto * scale.asDiagonal();
  for (const auto& lang : spec.languages) {
    Eigen::MatrixXd q = random_orthogonal(spec.dim, rng);
    Eigen::MatrixXd rows = t.proto * q + gaussian(spec.words, spec.dim, spec.noise, rng);
    t.spaces.emplace(lang, make_space(lang, rows));
  }
  auto ids = permutation(spec.words, rng);
  std::vector<std::size_t> train(ids.begin(), ids.begin() + spec.train_pairs);
  t.validation_ids.assign(ids.begin() + spec.train_pairs,
                          ids.begin() + spec.train_pairs + spec.validation_pairs);
  for (std::size_t l = 1; l < spec.languages.size(); ++l)
    t.train.push_back(id_lexicon(spec.languages[0], spec.languages[l], train));
  return t;
}

PlantedRule make_planted_rule(const PlantedRuleSpec& spec) {
  PlantedRule out{make_trilingual(spec.space), {}, {}};
  std::mt19937_64 rng(spec.seed);
  out.direction = gaussian(spec.space.dim, 1, 1.0, rng).col(0).normalized();
  for (const auto& lang : spec.space.languages) {
    LabeledDataset ds;
    ds.language = lang;
    for (std::size_t d = 0; d < spec.docs_per_language; ++d) {
      Document doc;
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(spec.space.dim);
      for (std::size_t k = 0; k < spec.doc_length; ++k) {
        std::size_t id = rng() % spec.space.words;
        doc.tokens.push_back(word(lang, id));
        mean += out.tri.proto.row(id).transpose();
      }
      doc.label = out.direction.dot(mean) > 0 ? Label::Hate : Label::NonHate;
      ds.docs.push_back(std::move(doc));
    }
    out.datasets.emplace(lang, std::move(ds));
  }
  return out;
}

PairedCorpus make_paired_corpus(std::size_t pairs, std::size_t sentences_per_pair, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t generic = 30, private_fillers = 4;
  PairedCorpus out;
  auto g = [&] { return "g" + std::to_string(rng() % generic); };
  for (std::size_t i = 0; i < pairs; ++i)
    out.planted.emplace_back("p" + std::to_string(i), "q" + std::to_string(i));
  for (std::size_t s = 0; s < sentences_per_pair; ++s) {
    for (std::size_t i = 0; i < pairs; ++i) {
      Tokens line;
      auto f = [&] { return "f" + std::to_string(i) + "x" + std::to_string(rng() % private_fillers); };
      line = {g(), f(), f(), out.planted[i].first, out.planted[i].second, f(), f(), g()};
      if (rng() % 2) std::swap(line[3], line[4]);
      out.corpus.push_back(std::move(line));
    }
    out.corpus.push_back({g(), g(), g(), "z0", g(), g(), g()});
  }
  return out;
}

ContextFixture make_context_fixture(std::size_t topics, std::uint64_t seed) {
  const std::size_t per_topic = 5;  // anchor + 4 context words
  const std::size_t words = topics * per_topic;
  const std::size_t dim = 16;
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd proto = gaussian(words, dim, 0.25, rng);
  SpaceSet spaces;
  spaces.emplace("en", make_space("en", proto));
  spaces.emplace("es", make_space("es", proto * random_orthogonal(dim, rng) +
                                            gaussian(words, dim, 0.005, rng)));
  std::vector<std::size_t> all(words);
  std::iota(all.begin(), all.end(), 0);
  AlignmentModel model = fit_hub_alignment(spaces, {id_lexicon("en", "es", all)}, AlignmentConfig{});

  ContextFixture out{std::move(spaces), std::move(model), {}, {}};
  // Context word rates differ per topic so metric agreement singles out the
  // counterpart topic.
  std::vector<std::vector<double>> rates(topics);
  for (std::size_t t = 0; t < topics; ++t)
    for (std::size_t j = 1; j < per_topic; ++j)
      rates[t].push_back(0.15 + 0.8 * static_cast<double>((t * 7 + j * 3) % 11) / 11.0);

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> layout;  // (topic, members) per doc
  for (std::size_t d = 0; d < 60 * topics; ++d) {
    std::size_t t = rng() % topics;
    std::vector<std::size_t> members{t * per_topic};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 1; j < per_topic; ++j)
      if (u(rng) < rates[t][j - 1]) members.push_back(t * per_topic + j);
    layout.emplace_back(t, std::move(members));
  }
  for (const std::string lang : {"en", "es"}) {
    LabeledDataset ds;
    ds.language = lang;
    for (const auto& [t, members] : layout) {
      Document doc;
      for (auto m : members) doc.tokens.push_back(word(lang, m));
      doc.label = Label::Hate;
      ds.docs.push_back(std::move(doc));
    }
    // A few non-hate documents so both classes exist.
    for (std::size_t t = 0; t < topics; ++t)
      ds.docs.push_back({{word(lang, t * per_topic + 1), word(lang, t * per_topic + 2)}, Label::NonHate});
    out.datasets.emplace(lang, std::move(ds));
  }
  for (std::size_t t = 0; t < topics; ++t)
    out.planted.emplace_back(word("en", t * per_topic), word("es", t * per_topic));
  return out;
}

#ifndef XLEMB_TEST_DATA_DIR
#define XLEMB_TEST_DATA_DIR "tests/data"
#endif

std::filesystem::path test_data_dir() { return XLEMB_TEST_DATA_DIR; }

CcaFixture load_cca_fixture(const std::string& name) {
  std::ifstream in(test_data_dir() / name);
  if (!in) throw Error(ErrorKind::Io, "missing fixture " + name);
  std::size_t n = 0, d1 = 0, d2 = 0, k = 0;
  in >> n >> d1 >> d2;
  CcaFixture f;
  f.X.resize(n, d1);
  f.Y.resize(n, d2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d1; ++j) in >> f.X(i, j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d2; ++j) in >> f.Y(i, j);
  in >> k;
  f.expected.resize(k);
  for (std::size_t i = 0; i < k; ++i) in >> f.expected(i);
  if (!in) throw Error(ErrorKind::Format, "truncated fixture " + name);
  return f;
}

Eigen::VectorXd eigen_oracle_correlations(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const double n = static_cast<double>(X.rows());
  Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd Yc = Y.rowwise() - Y.colwise().mean();
  Eigen::MatrixXd Cxx = Xc.transpose() * Xc / n;
  Eigen::MatrixXd Cyy = Yc.transpose() * Yc / n;
  Eigen::MatrixXd Cxy = Xc.transpose() * Yc / n;
  Eigen::MatrixXd M = Cxy * Cyy.ldlt().solve(Cxy.transpose());
  M = (0.5 * (M + M.transpose())).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Cxx);
  Eigen::VectorXd rho2 = es.eigenvalues().reverse();  // ascending -> descending
  const Eigen::Index k = std::min(X.cols(), Y.cols());
  return rho2.head(k).cwiseMax(0.0).cwiseSqrt();
}

std::vector<AssociationRule> brute_force_rules(const std::vector<Tokens>& docs, const MiningConfig& cfg) {
  auto contains = [&](const Tokens& d, const std::string& w) {
    return !cfg.stopwords.count(w) && std::find(d.begin(), d.end(), w) != d.end();
  };
  std::vector<std::string> vocab;
  for (const auto& d : docs)
    for (const auto& w : d)
      if (!cfg.stopwords.count(w) && std::find(vocab.begin(), vocab.end(), w) == vocab.end())
        vocab.push_back(w);
  std::vector<std::pair<std::size_t, std::string>> df;
  for (const auto& w : vocab) {
    std::size_t c = 0;
    for (const auto& d : docs) c += contains(d, w) ? 1 : 0;
    df.emplace_back(c, w);
  }
  std::sort(df.begin(), df.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<std::string> antecedents;
  for (std::size_t i = 0; i < std::min(cfg.top_n_antecedents, df.size()); ++i)
    antecedents.push_back(df[i].second);
  std::sort(antecedents.begin(), antecedents.end());

  std::vector<AssociationRule> out;
  const double n = static_cast<double>(docs.size());
  for (const auto& x : antecedents) {
    std::vector<AssociationRule> rules;
    for (const auto& u : vocab) {
      if (u == x) continue;
      std::size_t both = 0, with_x = 0;
      for (const auto& d : docs) {
        with_x += contains(d, x) ? 1 : 0;
        both += contains(d, x) && contains(d, u) ? 1 : 0;
      }
      if (both == 0) continue;
      double support = static_cast<double>(both) / n;
      double confidence = static_cast<double>(both) / static_cast<double>(with_x);
      if (support >= cfg.min_support && confidence >= cfg.min_confidence)
        rules.push_back({x, u, support, confidence});
    }
    std::sort(rules.begin(), rules.end(), [](const auto& a, const auto& b) {
      return a.confidence != b.confidence ? a.confidence > b.confidence : a.consequent < b.consequent;
    });
    out.insert(out.end(), rules.begin(), rules.end());
  }
  return out;
}

std::vector<Tokens> random_corpus(std::mt19937_64& rng, std::size_t max_docs) {
  std::vector<Tokens> docs(1 + rng() % max_docs);
  const std::size_t vocab = 3 + rng() % 12;
  for (auto& d : docs) {
    std::size_t len = 1 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k) d.push_back("t" + std::to_string(rng() % vocab));
  }
  return docs;
}

namespace {

std::ofstream open(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return out;
}

}  // namespace

void write_pipeline_fixtures(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const std::size_t topics = 20, per_topic = 8, generic = 20;
  const std::vector<std::string> langs{"en", "es", "it"};
  // Topic t owns words [t * per_topic, (t + 1) * per_topic); generic words
  // follow. Word 0 of each topic is its seed term.
  const std::size_t topic_words = topics * per_topic;
  std::mt19937_64 rng(seed);

  for (const auto& lang : langs) {
    auto out = open(dir / ("corpus." + lang + ".txt"));
    std::mt19937_64 lrng(rng());
    for (std::size_t line = 0; line < 4000; ++line) {
      std::size_t t = lrng() % topics;
      std::size_t len = 6 + lrng() % 5;
      std::string text;
      bool seeded = lrng() % 10 < 8;
      for (std::size_t k = 0; k < len; ++k) {
        std::size_t id;
        if (k == 0 && seeded) id = t * per_topic;
        else if (lrng() % 4 == 0) id = topic_words + lrng() % generic;
        else id = t * per_topic + 1 + lrng() % (per_topic - 1);
        if (!text.empty()) text += ' ';
        std::string w = word(lang, id);
        // Exercise the tokenizer on part of the lines.
        if (k == 1 && line % 17 == 0) w = "#" + w;
        if (k == 2 && line % 23 == 0) w = "@user " + w;
        if (k == 0 && line % 31 == 0) w = "http://example.org/x " + w;
        text += w;
      }
      out << text << '\n';
    }
  }

  {
    auto out = open(dir / "seeds.txt");
    out << "# one seed term per line\n";
    for (const auto& lang : langs)
      for (std::size_t t = 0; t < topics; ++t) out << word(lang, t * per_topic) << '\n';
    out << "two words\n";
  }

  for (std::size_t l = 1; l < langs.size(); ++l) {
    auto out = open(dir / ("lexicon." + langs[l] + ".tsv"));
    out << "# " << langs[0] << " -> " << langs[l] << '\n';
    for (std::size_t i = 0; i < topic_words + generic; ++i) {
      out << word(langs[0], i) << '\t' << word(langs[l], i);
      if (i % 40 == 5) out << ',' << word(langs[l], (i + 1) % topic_words);
      out << '\n';
    }
    out << "multi word\t" << word(langs[l], 0) << '\n';
  }

  for (const auto& lang : langs) {
    auto out = open(dir / ("dataset." + lang + ".tsv"));
    std::mt19937_64 lrng(rng());
    for (std::size_t d = 0; d < 600; ++d) {
      std::size_t t = lrng() % topics;
      int label = t < topics / 2 ? 1 : 0;
      out << label << '\t';
      std::size_t len = 5 + lrng() % 4;
      for (std::size_t k = 0; k < len; ++k) {
        std::size_t id = lrng() % 5 == 0 ? topic_words + lrng() % generic
                                         : t * per_topic + lrng() % per_topic;
        out << (k ? " " : "") << word(lang, id);
      }
      out << '\n';
    }
  }
}

}  // namespace xlemb::fixtures
