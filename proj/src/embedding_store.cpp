#include "xlemb/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "xlemb/error.hpp"
#include "xlemb/text.hpp"

namespace xlemb {

EmbeddingSpace::EmbeddingSpace(std::string language, std::vector<std::string> words,
                               RowMatrixF vectors)
    : language_(std::move(language)), words_(std::move(words)), vectors_(std::move(vectors)) {
  if (words_.empty()) throw Error(ErrorKind::EmptyInput, "embedding space has no words");
  if (static_cast<std::size_t>(vectors_.rows()) != words_.size())
    throw Error(ErrorKind::Dimension, "vocabulary size " + std::to_string(words_.size()) +
                                          " does not match " + std::to_string(vectors_.rows()) +
                                          " vector rows");
  if (vectors_.cols() < 1) throw Error(ErrorKind::Dimension, "embedding dimension must be >= 1");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i].empty()) throw Error(ErrorKind::Format, "empty word at row " + std::to_string(i));
    if (!index_.emplace(words_[i], i).second)
      throw Error(ErrorKind::Format, "duplicate word '" + words_[i] + "'");
  }
}

std::optional<std::size_t> EmbeddingSpace::index_of(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSpace::vector(const std::string& word) const {
  auto idx = index_of(word);
  if (!idx) throw Error(ErrorKind::NotFound, "'" + word + "' not in " + language_ + " vocabulary");
  return row(*idx);
}

std::span<const float> EmbeddingSpace::row(std::size_t index) const {
  return {vectors_.data() + index * dim(), dim()};
}

namespace {

template <typename T>
bool parse_number(std::string_view field, T& out) {
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

EmbeddingSpace load_embeddings(const std::filesystem::path& path, const std::string& language,
                               LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string name = path.string();

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyInput, name + " is empty");
  auto header = split_whitespace(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim))
    throw format_error(name, 1, "expected header '<vocab_count> <dim>'");
  if (count == 0) throw Error(ErrorKind::EmptyInput, name + " declares an empty vocabulary");
  if (dim == 0) throw format_error(name, 1, "dimension must be >= 1");

  RowMatrixF rows(count, dim);
  std::vector<std::string> words;
  words.reserve(count);
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t rows_read = 0;
  std::size_t duplicates = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (rows_read == count)
      throw format_error(name, line_no, "more rows than the header count " + std::to_string(count));
    ++rows_read;
    if (fields.size() != dim + 1)
      throw format_error(name, line_no,
                         "expected " + std::to_string(dim) + " components, found " +
                             std::to_string(fields.size() - 1));
    std::string word(fields[0]);
    std::vector<float> values(dim);
    bool nonzero = false;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], values[j]) || !std::isfinite(values[j]))
        throw format_error(name, line_no, "bad number '" + std::string(fields[j + 1]) + "'");
      nonzero = nonzero || values[j] != 0.0f;
    }
    if (!nonzero) throw format_error(name, line_no, "all-zero vector for '" + word + "'");
    if (seen.count(word)) {
      ++duplicates;
      continue;
    }
    seen.emplace(word, words.size());
    for (std::size_t j = 0; j < dim; ++j) rows(words.size(), j) = values[j];
    words.push_back(std::move(word));
  }
  if (rows_read != count)
    throw format_error(name, line_no + 1,
                       "header declares " + std::to_string(count) + " rows, found " +
                           std::to_string(rows_read));

  rows.conservativeResize(words.size(), dim);
  if (report) report->duplicate_rows = duplicates;
  return EmbeddingSpace(language, std::move(words), std::move(rows));
}

void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << space.size() << ' ' << space.dim() << '\n';
  std::string line;
  for (std::size_t i = 0; i < space.size(); ++i) {
    line = space.words()[i];
    for (float v : space.row(i)) {
      line += ' ';
      append_fixed(line, v, 6);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

EmbeddingSpace l2_normalize(const EmbeddingSpace& space) {
  RowMatrixF rows = space.vectors();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    // Accumulate in double so unit norms hold to 1e-6 even for large dims.
    double norm = rows.row(i).cast<double>().norm();
    if (norm == 0.0)
      throw Error(ErrorKind::UndefinedSimilarity, "zero vector for '" + space.words()[i] + "'");
    rows.row(i) = (rows.row(i).cast<double>() / norm).cast<float>();
  }
  return EmbeddingSpace(space.language(), space.words(), std::move(rows));
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size())
    throw Error(ErrorKind::Dimension, "cosine of vectors with dimensions " +
                                          std::to_string(u.size()) + " and " +
                                          std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw Error(ErrorKind::UndefinedSimilarity, "cosine with a zero vector");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

}  // namespace xlemb
