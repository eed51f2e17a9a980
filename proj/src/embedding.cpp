#include "dcrec/embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dcrec/error.hpp"
#include "dcrec/rng.hpp"

namespace dcrec {

WordVectors WordVectors::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings: " + path.string());
  WordVectors wv;
  std::string line;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw IoError("empty embeddings file: " + path.string());
  {
    std::istringstream header(line);
    if (!(header >> count >> wv.dim) || wv.dim == 0)
      throw IoError("embeddings header must be '<count> <dim>': " + path.string());
  }
  wv.vectors.reserve(count);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> v(wv.dim);
    for (auto& x : v) {
      if (!(ss >> x) || !std::isfinite(x))
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(wv.dim) + " finite values");
    }
    wv.vectors.insert_or_assign(std::move(word), std::move(v));
  }
  return wv;
}

const std::vector<double>* WordVectors::find(std::string_view word) const {
  const auto it = vectors.find(std::string(word));
  return it == vectors.end() ? nullptr : &it->second;
}

std::vector<double> hashed_embedding(std::string_view word, std::size_t dim) {
  Lcg64 rng(fnv1a(word));
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.uniform(-0.5, 0.5);
  const double n = norm2(v);
  if (n > 0.0)
    for (auto& x : v) x /= n;
  return v;
}

EmbeddingTable::EmbeddingTable(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() == 0) throw DomainError("embedding table needs a padding row");
  for (double x : weights_.row(0))
    if (x != 0.0) throw DomainError("embedding padding row must be zero");
}

EmbeddingTable EmbeddingTable::build(const Vocabulary& vocab, const WordVectors& vectors) {
  Matrix w(vocab.table_rows(), vectors.dim);
  for (std::size_t id = 1; id <= vocab.size(); ++id) {
    const auto& stem = vocab.stem(id);
    const auto* v = vectors.find(stem);
    const auto values = v ? *v : hashed_embedding(stem, vectors.dim);
    std::copy(values.begin(), values.end(), w.row(id).begin());
  }
  const auto unk = hashed_embedding("<unk>", vectors.dim);
  std::copy(unk.begin(), unk.end(), w.row(vocab.oov_id()).begin());
  return EmbeddingTable(std::move(w));
}

EmbeddingTable EmbeddingTable::build(const Vocabulary& vocab, std::size_t dim) {
  WordVectors none;
  none.dim = dim;
  return build(vocab, none);
}

Matrix EmbeddingTable::embed(std::span<const std::size_t> ids, std::size_t length) const {
  Matrix out(length, dim());
  for (std::size_t t = 0; t < std::min(length, ids.size()); ++t) {
    if (ids[t] >= rows()) throw DomainError("embedding id out of range");
    const auto r = row(ids[t]);
    std::copy(r.begin(), r.end(), out.row(t).begin());
  }
  return out;
}

}  // namespace dcrec
