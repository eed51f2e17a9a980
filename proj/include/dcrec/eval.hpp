#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcrec/corpus.hpp"
#include "dcrec/dcnn.hpp"

namespace dcrec {

struct EvalPair {
  std::string user;
  std::string item;
  double predicted = 0.0;
  double actual = 0.0;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct TagScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
};

/// Seeded shuffle, then the first floor(n * fraction) elements train and the
/// rest test. Throws DomainError for n < 2 or a fraction outside (0, 1).
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& records, double fraction,
                                                std::uint64_t seed);

/// Shuffled index order used by split().
std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed);
std::size_t split_point(std::size_t n, double fraction);

double mae(std::span<const EvalPair> pairs);
double rmse(std::span<const EvalPair> pairs);

/// Accumulates token-level counts with {B, I} as the positive class.
void count_tags(std::span<const BioTag> pred, std::span<const BioTag> gold, ConfusionCounts& c);
TagScores scores(const ConfusionCounts& c);
TagScores tag_f1(std::span<const BioTag> pred, std::span<const BioTag> gold);

double sentiment_accuracy(std::span<const Polarity> pred, std::span<const Polarity> gold);

// ---------------------------------------------------------------------------

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split(const std::vector<T>& records, double fraction,
                                                std::uint64_t seed) {
  const auto order = split_order(records.size(), seed);
  const auto cut = split_point(records.size(), fraction);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(cut);
  out.second.reserve(records.size() - cut);
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < cut ? out.first : out.second).push_back(records[order[k]]);
  return out;
}

}  // namespace dcrec
