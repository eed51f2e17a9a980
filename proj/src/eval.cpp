#include "dcrec/eval.hpp"

#include <cmath>
#include <numeric>

#include "dcrec/error.hpp"
#include "dcrec/rng.hpp"

namespace dcrec {

std::vector<std::size_t> split_order(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DomainError("split needs at least 2 records");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Lcg64 rng(seed);
  shuffle_in_place(order, rng);
  return order;
}

std::size_t split_point(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("train fraction must be in (0, 1)");
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
}

namespace {
void check_pairs(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw DomainError("no evaluation pairs");
  for (const auto& p : pairs)
    if (!std::isfinite(p.predicted) || !std::isfinite(p.actual))
      throw DomainError("evaluation pair is not finite");
}

bool positive(BioTag t) { return t != BioTag::O; }
}  // namespace

double mae(std::span<const EvalPair> pairs) {
  check_pairs(pairs);
  double s = 0.0;
  for (const auto& p : pairs) s += std::abs(p.predicted - p.actual);
  return s / static_cast<double>(pairs.size());
}

double rmse(std::span<const EvalPair> pairs) {
  check_pairs(pairs);
  double s = 0.0;
  for (const auto& p : pairs) s += (p.predicted - p.actual) * (p.predicted - p.actual);
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

void count_tags(std::span<const BioTag> pred, std::span<const BioTag> gold, ConfusionCounts& c) {
  if (pred.size() != gold.size()) throw DomainError("tag sequences differ in length");
  for (std::size_t t = 0; t < pred.size(); ++t) {
    const bool p = positive(pred[t]);
    const bool g = positive(gold[t]);
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
}

TagScores scores(const ConfusionCounts& c) {
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  TagScores s;
  s.counts = c;
  s.precision = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp));
  s.recall = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
  s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

TagScores tag_f1(std::span<const BioTag> pred, std::span<const BioTag> gold) {
  ConfusionCounts c;
  count_tags(pred, gold, c);
  return scores(c);
}

double sentiment_accuracy(std::span<const Polarity> pred, std::span<const Polarity> gold) {
  if (pred.size() != gold.size()) throw DomainError("label sequences differ in length");
  if (pred.empty()) throw DomainError("no labels to score");
  std::size_t hit = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) hit += pred[k] == gold[k];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace dcrec
