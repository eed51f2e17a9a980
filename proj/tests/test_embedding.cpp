#include <doctest.h>

#include <cmath>

#include "dcrec/embedding.hpp"
#include "dcrec/error.hpp"
#include "test_util.hpp"

using namespace dcrec;

TEST_CASE("WordVectors::load") {
  const auto good = test::write_scratch("emb_good", "e.txt", "2 3\nbatteri 1 0 0\nscreen 0 0.5 -0.5\n");
  const auto wv = WordVectors::load(good);
  CHECK(wv.dim == 3);
  CHECK(wv.vectors.size() == 2);
  REQUIRE(wv.find("screen") != nullptr);
  CHECK(*wv.find("screen") == std::vector<double>{0, 0.5, -0.5});
  CHECK(wv.find("camera") == nullptr);

  CHECK_THROWS_AS(WordVectors::load(test::write_scratch("emb_short", "e.txt", "1 3\nx 1 2\n")), IoError);
  CHECK_THROWS_AS(WordVectors::load(test::write_scratch("emb_header", "e.txt", "three\n")), IoError);
  CHECK_THROWS_AS(WordVectors::load(test::write_scratch("emb_nan", "e.txt", "1 2\nx nan 1\n")), IoError);
  CHECK_THROWS_AS(WordVectors::load(good.parent_path() / "missing.txt"), IoError);
}

TEST_CASE("hashed_embedding is deterministic and unit length") {
  const auto a = hashed_embedding("batteri", 16);
  CHECK(a == hashed_embedding("batteri", 16));
  CHECK(a != hashed_embedding("screen", 16));
  CHECK(norm2(a) == doctest::Approx(1.0).epsilon(1e-12));
  for (double x : a) CHECK(std::abs(x) <= 1.0);
}

TEST_CASE("EmbeddingTable rows") {
  const auto vocab = Vocabulary::from_stems({"batteri", "screen"});
  WordVectors wv;
  wv.dim = 2;
  wv.vectors["batteri"] = {1.0, 2.0};
  const auto t = EmbeddingTable::build(vocab, wv);
  CHECK(t.rows() == 4);
  CHECK(t.dim() == 2);
  CHECK(t.row(0)[0] == 0.0);
  CHECK(t.row(0)[1] == 0.0);
  CHECK(t.row(1)[0] == 1.0);
  CHECK(t.row(1)[1] == 2.0);
  const auto fallback = hashed_embedding("screen", 2);
  CHECK(t.row(2)[0] == fallback[0]);
  const auto unk = hashed_embedding("<unk>", 2);
  CHECK(t.row(vocab.oov_id())[1] == unk[1]);

  const std::vector<std::size_t> ids = {1, 3};
  const auto m = t.embed(ids, 3);
  CHECK(m.rows() == 3);
  CHECK(m(0, 1) == 2.0);
  CHECK(m(1, 0) == unk[0]);
  CHECK(m(2, 0) == 0.0);
  const std::vector<std::size_t> bad = {9};
  CHECK_THROWS_AS(t.embed(bad, 1), DomainError);

  Matrix nonzero_pad(2, 2, 1.0);
  CHECK_THROWS_AS(EmbeddingTable{nonzero_pad}, DomainError);
}
