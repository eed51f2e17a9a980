#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dcrec/corpus.hpp"
#include "dcrec/matrix.hpp"

namespace dcrec {

/// Word vectors read from the plain-text interchange format: a header line
/// `<count> <dim>` followed by `<word> <dim floats>` lines.
struct WordVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  static WordVectors load(const std::filesystem::path& path);
  const std::vector<double>* find(std::string_view word) const;
};

/// Deterministic stand-in vector for a word without an embedding: the
/// bytes of the word (FNV-1a) seed an Lcg64, coordinates are drawn from
/// Uniform[-0.5, 0.5] and the result is scaled to unit length.
std::vector<double> hashed_embedding(std::string_view word, std::size_t dim);

/// Frozen embedding matrix indexed by vocabulary id. Row 0 (padding) is all
/// zeros; the out-of-vocabulary row holds hashed_embedding("<unk>").
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Matrix weights);

  /// Rows for every vocabulary stem, taken from `vectors` when present and
  /// from hashed_embedding otherwise.
  static EmbeddingTable build(const Vocabulary& vocab, const WordVectors& vectors);
  static EmbeddingTable build(const Vocabulary& vocab, std::size_t dim);

  std::size_t dim() const noexcept { return weights_.cols(); }
  std::size_t rows() const noexcept { return weights_.rows(); }
  std::span<const double> row(std::size_t id) const { return weights_.row(id); }
  const Matrix& weights() const noexcept { return weights_; }

  /// L x dim matrix for a sequence of ids, zero-padded or truncated to L.
  Matrix embed(std::span<const std::size_t> ids, std::size_t length) const;

 private:
  Matrix weights_;
};

}  // namespace dcrec
