#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcrec/error.hpp"
#include "dcrec/eval.hpp"

using namespace dcrec;

namespace {

std::vector<EvalPair> pairs(std::vector<double> pred, std::vector<double> actual) {
  std::vector<EvalPair> out;
  for (std::size_t k = 0; k < pred.size(); ++k) out.push_back({"u", "i", pred[k], actual[k]});
  return out;
}

using B = BioTag;

}  // namespace

TEST_CASE("split examples") {
  std::vector<int> records(10);
  std::iota(records.begin(), records.end(), 0);
  const auto [train, test] = split(records, 0.8, 3);
  CHECK(train.size() == 8);
  CHECK(test.size() == 2);
  std::vector<int> all = train;
  all.insert(all.end(), test.begin(), test.end());
  std::sort(all.begin(), all.end());
  CHECK(all == records);
  const auto again = split(records, 0.8, 3);
  CHECK(again.first == train);
  CHECK(again.second == test);
  CHECK(split_point(7, 0.8) == 5);
  CHECK_THROWS_AS(split(std::vector<int>{1}, 0.8, 0), DomainError);
  CHECK_THROWS_AS(split(records, 0.0, 0), DomainError);
  CHECK_THROWS_AS(split(records, 1.0, 0), DomainError);
}

TEST_CASE("split is a partition for every seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 2 + seed % 17;
    auto order = split_order(n, seed);
    std::sort(order.begin(), order.end());
    for (std::size_t k = 0; k < n; ++k) CHECK(order[k] == k);
  }
}

TEST_CASE("mae and rmse examples") {
  CHECK(mae(pairs({3, 4}, {3, 4})) == 0.0);
  CHECK(rmse(pairs({3, 4}, {3, 4})) == 0.0);
  CHECK(mae(pairs({1, 2}, {3, 4})) == 2.0);
  CHECK(rmse(pairs({1, 2}, {3, 4})) == 2.0);
  CHECK(mae(pairs({2, 4}, {3, 1})) == 2.0);
  CHECK(rmse(pairs({2, 4}, {3, 1})) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK_THROWS_AS(mae({}), DomainError);
  CHECK_THROWS_AS(rmse({}), DomainError);
  CHECK_THROWS_AS(mae(pairs({NAN}, {1})), DomainError);
}

TEST_CASE("tag_f1 examples") {
  const std::vector<B> gold = {B::B, B::I, B::O, B::O};
  auto s = tag_f1(gold, gold);
  CHECK(s.f1 == 1.0);
  const std::vector<B> none = {B::O, B::O, B::O, B::O};
  s = tag_f1(none, gold);
  CHECK(s.f1 == 0.0);
  CHECK(s.precision == 0.0);
  CHECK(tag_f1(none, none).f1 == 0.0);

  const std::vector<B> p = {B::B, B::I, B::O, B::B, B::O};
  const std::vector<B> g = {B::B, B::O, B::I, B::B, B::O};
  s = tag_f1(p, g);
  CHECK(s.counts == ConfusionCounts{2, 1, 1, 1});
  CHECK(s.precision == doctest::Approx(2.0 / 3));
  CHECK(s.recall == doctest::Approx(2.0 / 3));
  CHECK(s.f1 == doctest::Approx(2.0 / 3));
  CHECK_THROWS_AS(tag_f1(p, gold), DomainError);
}

TEST_CASE("tag_f1 mirror property") {
  const std::vector<B> p = {B::B, B::I, B::I, B::O, B::B, B::O};
  const std::vector<B> g = {B::B, B::O, B::I, B::I, B::O, B::O};
  const auto a = tag_f1(p, g);
  const auto b = tag_f1(g, p);
  CHECK(a.precision == b.recall);
  CHECK(a.recall == b.precision);
  CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-15));
}

TEST_CASE("sentiment_accuracy examples") {
  using P = Polarity;
  const std::vector<P> gold = {P::Positive, P::Negative, P::Positive, P::Negative};
  CHECK(sentiment_accuracy(gold, gold) == 1.0);
  const std::vector<P> wrong = {P::Negative, P::Positive, P::Negative, P::Positive};
  CHECK(sentiment_accuracy(wrong, gold) == 0.0);
  const std::vector<P> three = {P::Positive, P::Negative, P::Positive, P::Positive};
  CHECK(sentiment_accuracy(three, gold) == 0.75);
  CHECK_THROWS_AS(sentiment_accuracy({}, {}), DomainError);
  CHECK_THROWS_AS(sentiment_accuracy(three, std::vector<P>{P::Positive}), DomainError);
}
