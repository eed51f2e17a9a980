#include "dcrec/balance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "dcrec/error.hpp"
#include "dcrec/kernels.hpp"
#include "dcrec/rng.hpp"

namespace dcrec {

std::vector<std::vector<std::size_t>> nearest_neighbors(const Matrix& points, std::size_t k) {
  const std::size_t n = points.rows();
  if (k >= n) throw DomainError("nearest_neighbors: k must be below the number of points");
  const Matrix d = kernels::pairwise_sq_dist(points);
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::erase(order, i);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return d(i, a) < d(i, b) || (d(i, a) == d(i, b) && a < b);
                      });
    out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    order.resize(n);
  }
  return out;
}

SmoteResult smote(std::span<const FeatureSample> samples, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw DomainError("smote: k must be >= 1");
  std::vector<std::size_t> neg, pos;
  std::size_t dim = samples.empty() ? 0 : samples.front().features.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != dim) throw ShapeError("smote: samples differ in dimension");
    for (double x : samples[i].features)
      if (!std::isfinite(x)) throw DomainError("smote: non-finite feature");
    (samples[i].label == Polarity::Negative ? neg : pos).push_back(i);
  }
  if (neg.empty() || pos.empty()) throw DomainError("smote: need at least two classes");

  SmoteResult result;
  result.samples.assign(samples.begin(), samples.end());
  if (neg.size() == pos.size()) return result;

  const auto& minority = neg.size() < pos.size() ? neg : pos;
  const std::size_t deficit = (neg.size() < pos.size() ? pos.size() : neg.size()) - minority.size();
  if (minority.size() < 2) throw DomainError("smote: insufficient minority samples");
  if (k >= minority.size()) {
    std::clog << "warning: smote k=" << k << " clamped to " << minority.size() - 1 << '\n';
    k = minority.size() - 1;
  }
  result.k_used = k;

  Matrix points(minority.size(), dim);
  for (std::size_t r = 0; r < minority.size(); ++r) {
    const auto& f = samples[minority[r]].features;
    std::copy(f.begin(), f.end(), points.row(r).begin());
  }
  const auto neighbors = nearest_neighbors(points, k);

  const Polarity label = samples[minority.front()].label;
  Lcg64 rng(seed);
  result.samples.reserve(samples.size() + deficit);
  result.origins.reserve(deficit);
  for (std::size_t s = 0; s < deficit; ++s) {
    const std::size_t base = s % minority.size();
    const std::size_t nb = neighbors[base][rng.below(k)];
    const double delta = rng.uniform();
    FeatureSample synth;
    synth.label = label;
    synth.synthetic = true;
    synth.features.resize(dim);
    const auto xb = points.row(base);
    const auto xn = points.row(nb);
    for (std::size_t c = 0; c < dim; ++c) synth.features[c] = xb[c] + delta * (xn[c] - xb[c]);
    result.samples.push_back(std::move(synth));
    result.origins.push_back({minority[base], minority[nb], delta});
  }
  return result;
}

Matrix pos_matrix(std::span<const PosTag> tags, std::size_t length) {
  Matrix m(length, kPosTagCount);
  for (std::size_t t = 0; t < std::min(length, tags.size()); ++t) m(t, tag_index(tags[t])) = 1.0;
  return m;
}

FeatureSample embed_for_smote(std::span<const std::size_t> ids, std::span<const PosTag> tags,
                              const EmbeddingTable& emb, std::size_t length, Polarity label) {
  const Matrix words = emb.embed(ids, length);
  const Matrix pos = pos_matrix(tags, length);
  FeatureSample s;
  s.label = label;
  s.features.reserve(words.size() + pos.size());
  s.features.insert(s.features.end(), words.flat().begin(), words.flat().end());
  s.features.insert(s.features.end(), pos.flat().begin(), pos.flat().end());
  return s;
}

}  // namespace dcrec
