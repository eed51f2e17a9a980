#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcrec/corpus.hpp"
#include "dcrec/embedding.hpp"
#include "dcrec/matrix.hpp"
#include "dcrec/tagger.hpp"

namespace dcrec {

struct FeatureSample {
  std::vector<double> features;
  Polarity label = Polarity::Negative;
  bool synthetic = false;
};

/// Provenance of one synthetic sample: indices of its base and neighbor in
/// the output list, and the interpolation factor that produced it.
struct SyntheticOrigin {
  std::size_t base = 0;
  std::size_t neighbor = 0;
  double delta = 0.0;
};

struct SmoteResult {
  std::vector<FeatureSample> samples;     // originals first, then synthetics
  std::vector<SyntheticOrigin> origins;   // one per synthetic, same order
  std::size_t k_used = 0;
};

/// Indices of the k nearest rows of `points` for every row (self
/// excluded), by Euclidean distance with ties broken by lower index.
std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& points, std::size_t k);

/// SMOTE oversampling of the minority class until both classes have the
/// same count. Base samples are taken round-robin over the minority class
/// (in input order); for each synthetic the generator first picks one of
/// the k neighbors (`below(k)`) and then draws delta = uniform().
/// k >= minority size is clamped to size - 1 with a warning.
SmoteResult smote(std::span<const FeatureSample> samples, std::size_t k, std::uint64_t seed);

/// L x 45 one-hot POS matrix, zero rows past the end of `tags`.
Matrix pos_matrix(std::span<const PosTag> tags, std::size_t length);

/// Flattened [L x d_w word embeddings | L x 45 POS one-hots], each part
/// row-major, padded or truncated to L tokens.
FeatureSample embed_for_smote(std::span<const std::size_t> ids, std::span<const PosTag> tags,
                              const EmbeddingTable& emb, std::size_t length, Polarity label);

}  // namespace dcrec
