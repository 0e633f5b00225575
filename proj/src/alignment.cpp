#include "xlemb/alignment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

namespace {

Eigen::MatrixXd to_double(std::span<const float> v) {
  Eigen::MatrixXd m(1, v.size());
  for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j];
  return m;
}

void normalize_rows(Eigen::MatrixXd& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (norm == 0.0) throw Error(ErrorKind::UndefinedSimilarity, "cannot normalize a zero vector");
    rows.row(i) /= norm;
  }
}

}  // namespace

Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::Singularity, "eigendecomposition of covariance failed");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  double largest = values(values.size() - 1);
  if (!(largest > 0.0) || values(0) <= 1e-12 * largest)
    throw Error(ErrorKind::Singularity,
                "covariance is rank-deficient (smallest eigenvalue " + std::to_string(values(0)) +
                    "); use a positive lambda");
  return eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& A) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  double cutoff = s.size() > 0 ? 1e-10 * s(0) : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

CcaResult fit_cca(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda,
                  double kept_ratio) {
  if (X.rows() != Y.rows())
    throw Error(ErrorKind::Dimension, "CCA needs paired rows, got " + std::to_string(X.rows()) +
                                          " and " + std::to_string(Y.rows()));
  if (X.rows() < 2) throw Error(ErrorKind::InsufficientData, "CCA needs at least 2 pairs");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::Config, "alignment.lambda must be >= 0");
  if (!(kept_ratio > 0.0 && kept_ratio <= 1.0))
    throw Error(ErrorKind::Config, "alignment.kept_ratio must lie in (0, 1]");

  const double n = static_cast<double>(X.rows());
  CcaResult r;
  r.means_src = X.colwise().mean();
  r.means_tgt = Y.colwise().mean();
  Eigen::MatrixXd Xc = X.rowwise() - r.means_src;
  Eigen::MatrixXd Yc = Y.rowwise() - r.means_tgt;

  Eigen::MatrixXd Cxx = (Xc.transpose() * Xc) / n;
  Eigen::MatrixXd Cyy = (Yc.transpose() * Yc) / n;
  Eigen::MatrixXd Cxy = (Xc.transpose() * Yc) / n;
  Cxx.diagonal().array() += lambda;
  Cyy.diagonal().array() += lambda;

  Eigen::MatrixXd Wx = inverse_sqrt_spd(Cxx);
  Eigen::MatrixXd Wy = inverse_sqrt_spd(Cyy);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wx * Cxy * Wy, Eigen::ComputeThinU | Eigen::ComputeThinV);

  const auto min_dim = static_cast<double>(std::min(X.cols(), Y.cols()));
  auto k = static_cast<Eigen::Index>(std::ceil(kept_ratio * min_dim - 1e-9));
  k = std::clamp<Eigen::Index>(k, 1, std::min<Eigen::Index>(X.rows(), svd.singularValues().size()));

  r.proj_src = Wx * svd.matrixU().leftCols(k);
  r.proj_tgt = Wy * svd.matrixV().leftCols(k);
  r.correlations = svd.singularValues().head(k);
  return r;
}

void validate(const AlignmentConfig& cfg) {
  if (cfg.pivot.empty()) throw Error(ErrorKind::Config, "alignment.pivot must be set");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
    throw Error(ErrorKind::Config, "alignment.lambda must be >= 0");
  if (!(cfg.kept_ratio > 0.0 && cfg.kept_ratio <= 1.0))
    throw Error(ErrorKind::Config, "alignment.kept_ratio must lie in (0, 1]");
}

AlignmentModel::AlignmentModel(AlignmentConfig config, std::map<std::string, LanguageMap> maps)
    : config_(std::move(config)), maps_(std::move(maps)) {
  validate(config_);
  auto pivot = maps_.find(config_.pivot);
  if (pivot == maps_.end() || !pivot->second.identity)
    throw Error(ErrorKind::Config, "pivot language " + config_.pivot + " must map by identity");
  shared_dim_ = pivot->second.dim;
  for (const auto& [lang, m] : maps_) {
    if (m.identity) {
      if (lang != config_.pivot)
        throw Error(ErrorKind::Config, "only the pivot may map by identity, not " + lang);
      continue;
    }
    auto dim = static_cast<Eigen::Index>(m.dim);
    auto shared = static_cast<Eigen::Index>(shared_dim_);
    if (m.mean.size() != dim || m.projection.rows() != dim ||
        m.projection.cols() != m.back_map.rows() || m.back_map.cols() != shared ||
        m.pivot_mean.size() != shared)
      throw Error(ErrorKind::Dimension, "inconsistent matrix shapes for language " + lang);
  }
}

std::vector<std::string> AlignmentModel::languages() const {
  std::vector<std::string> out;
  for (const auto& [lang, m] : maps_) out.push_back(lang);
  return out;
}

const LanguageMap& AlignmentModel::map_for(const std::string& lang) const {
  auto it = maps_.find(lang);
  if (it == maps_.end())
    throw Error(ErrorKind::Config, "language " + lang + " is not part of the alignment model");
  return it->second;
}

Eigen::MatrixXd AlignmentModel::transform(const std::string& lang,
                                          const Eigen::MatrixXd& rows) const {
  const LanguageMap& m = map_for(lang);
  if (static_cast<std::size_t>(rows.cols()) != m.dim)
    throw Error(ErrorKind::Dimension, lang + " vectors have dimension " +
                                          std::to_string(rows.cols()) + ", model expects " +
                                          std::to_string(m.dim));
  Eigen::MatrixXd input = rows;
  if (config_.normalize) normalize_rows(input);
  if (m.identity) return input;
  Eigen::MatrixXd canonical = (input.rowwise() - m.mean) * m.projection;
  return (canonical * m.back_map).rowwise() + m.pivot_mean;
}

namespace {

Eigen::MatrixXd gather(const EmbeddingSpace& space, const std::vector<std::string>& words) {
  Eigen::MatrixXd out(words.size(), space.dim());
  for (std::size_t i = 0; i < words.size(); ++i) out.row(i) = to_double(space.vector(words[i]));
  return out;
}

}  // namespace

AlignmentModel fit_hub_alignment(const SpaceSet& spaces,
                                 const std::vector<BilingualLexicon>& lexicons,
                                 const AlignmentConfig& cfg) {
  validate(cfg);
  auto pivot_it = spaces.find(cfg.pivot);
  if (pivot_it == spaces.end())
    throw Error(ErrorKind::Config, "pivot language " + cfg.pivot + " has no embedding space");
  const EmbeddingSpace& pivot_space = pivot_it->second;

  std::map<std::string, const BilingualLexicon*> by_target;
  for (const auto& lex : lexicons) {
    if (lex.src_lang() != cfg.pivot)
      throw Error(ErrorKind::Config, "lexicon " + lex.src_lang() + "->" + lex.tgt_lang() +
                                         " must have the pivot " + cfg.pivot + " as source");
    if (!spaces.count(lex.tgt_lang()))
      throw Error(ErrorKind::Config, "no embedding space for lexicon target " + lex.tgt_lang());
    if (!by_target.emplace(lex.tgt_lang(), &lex).second)
      throw Error(ErrorKind::Config, "more than one lexicon for language " + lex.tgt_lang());
  }

  std::map<std::string, LanguageMap> maps;
  LanguageMap pivot_map;
  pivot_map.dim = pivot_space.dim();
  pivot_map.identity = true;
  maps.emplace(cfg.pivot, std::move(pivot_map));

  for (const auto& [lang, space] : spaces) {
    if (lang == cfg.pivot) continue;
    auto lex_it = by_target.find(lang);
    if (lex_it == by_target.end())
      throw Error(ErrorKind::Config, "no lexicon " + cfg.pivot + "->" + lang);
    try {
      BilingualLexicon usable = restrict_to_vocab(*lex_it->second, pivot_space, space);
      std::vector<std::string> src_words, tgt_words;
      for (const auto& [s, t] : usable.pairs()) {
        src_words.push_back(s);
        tgt_words.push_back(t);
      }
      Eigen::MatrixXd X = gather(pivot_space, src_words);
      Eigen::MatrixXd Y = gather(space, tgt_words);
      if (cfg.normalize) {
        normalize_rows(X);
        normalize_rows(Y);
      }
      CcaResult cca = fit_cca(X, Y, cfg.lambda, cfg.kept_ratio);
      LanguageMap m;
      m.dim = space.dim();
      m.mean = cca.means_tgt;
      m.projection = cca.proj_tgt;
      m.back_map = pseudo_inverse(cca.proj_src);
      m.pivot_mean = cca.means_src;
      m.correlations = cca.correlations;
      maps.emplace(lang, std::move(m));
    } catch (const Error& e) {
      throw Error(e.kind(), "[" + lang + "] " + e.detail());
    }
  }
  return AlignmentModel(cfg, std::move(maps));
}

Eigen::VectorXd project(const AlignmentModel& model, const std::string& word,
                        const std::string& language, const SpaceSet& spaces) {
  model.map_for(language);
  auto it = spaces.find(language);
  if (it == spaces.end())
    throw Error(ErrorKind::Config, "no embedding space loaded for " + language);
  Eigen::MatrixXd row = to_double(it->second.vector(word));
  return model.transform(language, row).row(0).transpose();
}

std::optional<Eigen::VectorXd> SharedSpace::lookup(const std::string& word) const {
  auto idx = source->index_of(word);
  if (!idx) return std::nullopt;
  return vectors.row(static_cast<Eigen::Index>(*idx)).transpose();
}

SharedSpace shared_space(const AlignmentModel& model, const std::string& language,
                         const SpaceSet& spaces) {
  model.map_for(language);
  auto it = spaces.find(language);
  if (it == spaces.end())
    throw Error(ErrorKind::Config, "no embedding space loaded for " + language);
  const EmbeddingSpace& space = it->second;
  Eigen::MatrixXd raw = space.vectors().cast<double>();
  return SharedSpace{language, &space, model.transform(language, raw)};
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

void write_block(std::ostream& out, const Eigen::MatrixXd& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) line += ' ';
      append_exact(line, m(i, j));
    }
    line += '\n';
    out << line;
  }
}

Eigen::MatrixXd read_block(std::istream& in, const std::string& name) {
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0)
    throw Error(ErrorKind::Format, name + ": bad matrix header");
  Eigen::MatrixXd m(rows, cols);
  std::string token;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> token)) throw Error(ErrorKind::Format, name + ": truncated matrix");
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Format, name + ": bad number '" + token + "'");
      }
    }
  return m;
}

std::string format_double(double v) {
  std::string s;
  append_exact(s, v);
  return s;
}

}  // namespace

void save_alignment(const AlignmentModel& model, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  const AlignmentConfig& cfg = model.config();

  std::ofstream meta(dir / "alignment.meta", std::ios::binary | std::ios::trunc);
  if (!meta) throw Error(ErrorKind::Io, "cannot write " + (dir / "alignment.meta").string());
  meta << "format = xlemb-alignment-1\n";
  meta << "pivot = " << cfg.pivot << '\n';
  meta << "lambda = " << format_double(cfg.lambda) << '\n';
  meta << "kept_ratio = " << format_double(cfg.kept_ratio) << '\n';
  meta << "normalize = " << (cfg.normalize ? "true" : "false") << '\n';
  meta << "shared_dim = " << model.shared_dim() << '\n';
  meta << "languages =";
  for (const auto& lang : model.languages()) meta << ' ' << lang;
  meta << '\n';
  for (const auto& lang : model.languages()) meta << "dim." << lang << " = " << model.map_for(lang).dim << '\n';
  if (!meta) throw Error(ErrorKind::Io, "write failed for alignment.meta");

  for (const auto& lang : model.languages()) {
    const LanguageMap& m = model.map_for(lang);
    if (m.identity) continue;
    auto path = dir / (lang + ".matrices");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    write_block(out, m.mean);
    write_block(out, m.projection);
    write_block(out, m.back_map);
    write_block(out, m.pivot_mean);
    write_block(out, m.correlations.transpose());
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
  }
}

AlignmentModel load_alignment(const std::filesystem::path& dir) {
  auto meta_path = dir / "alignment.meta";
  std::ifstream meta(meta_path);
  if (!meta) throw Error(ErrorKind::Io, "cannot open " + meta_path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(meta, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw format_error(meta_path.string(), line_no, "expected key = value");
    kv[std::string(trim(std::string_view(line).substr(0, eq)))] =
        std::string(trim(std::string_view(line).substr(eq + 1)));
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::Format, meta_path.string() + ": missing " + key);
    return it->second;
  };
  if (get("format") != "xlemb-alignment-1")
    throw Error(ErrorKind::Format, meta_path.string() + ": unknown format " + get("format"));

  AlignmentConfig cfg;
  try {
    cfg.pivot = get("pivot");
    cfg.lambda = std::stod(get("lambda"));
    cfg.kept_ratio = std::stod(get("kept_ratio"));
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::Format, meta_path.string() + ": bad numeric field");
  }
  cfg.normalize = get("normalize") == "true";

  std::map<std::string, LanguageMap> maps;
  for (auto lang_view : split_whitespace(get("languages"))) {
    std::string lang(lang_view);
    LanguageMap m;
    m.dim = std::stoul(get("dim." + lang));
    if (lang == cfg.pivot) {
      m.identity = true;
    } else {
      auto path = dir / (lang + ".matrices");
      std::ifstream in(path);
      if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
      m.mean = read_block(in, path.string());
      m.projection = read_block(in, path.string());
      m.back_map = read_block(in, path.string());
      m.pivot_mean = read_block(in, path.string());
      m.correlations = read_block(in, path.string()).transpose();
    }
    maps.emplace(lang, std::move(m));
  }
  return AlignmentModel(cfg, std::move(maps));
}

}  // namespace xlemb
