#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace xlemb {

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One language's vocabulary and its dense vectors, one row per word.
// Immutable once constructed.
class EmbeddingSpace {
 public:
  // Throws Error(Dimension) when words and rows disagree, Error(Format) on
  // duplicate or empty words, Error(EmptyInput) when there are no words.
  EmbeddingSpace(std::string language, std::vector<std::string> words, RowMatrixF vectors);

  const std::string& language() const { return language_; }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return words_.size(); }

  const std::vector<std::string>& words() const { return words_; }
  const RowMatrixF& vectors() const { return vectors_; }

  std::optional<std::size_t> index_of(const std::string& word) const;
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  // Throws Error(NotFound) for out-of-vocabulary words.
  std::span<const float> vector(const std::string& word) const;
  std::span<const float> row(std::size_t index) const;

 private:
  std::string language_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  RowMatrixF vectors_;
};

// Languages keyed by ISO code.
using SpaceSet = std::map<std::string, EmbeddingSpace>;

struct LoadReport {
  std::size_t duplicate_rows = 0;
};

// Reads the word2vec text format. Duplicate words keep their first row and
// are counted in `report`; all-zero rows are rejected.
EmbeddingSpace load_embeddings(const std::filesystem::path& path, const std::string& language,
                               LoadReport* report = nullptr);

// Writes the word2vec text format with six decimals per component.
void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path);

// Copy with every row scaled to unit Euclidean norm.
EmbeddingSpace l2_normalize(const EmbeddingSpace& space);

double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

}  // namespace xlemb
