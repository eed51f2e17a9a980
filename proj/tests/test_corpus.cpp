#include <doctest.h>

#include <sstream>

#include "dcrec/corpus.hpp"
#include "dcrec/error.hpp"
#include "dcrec/text_file.hpp"
#include "test_util.hpp"

using namespace dcrec;

namespace {

std::vector<std::pair<std::string, std::string>> pairs(const std::vector<Token>& tokens) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& t : tokens) out.emplace_back(t.surface, t.stem);
  return out;
}

std::vector<Token> norm(std::string_view text) {
  static const auto stop = StopwordSet::load_default();
  static const auto con = ContractionTable::load_default();
  return normalize(text, stop, con);
}

}  // namespace

TEST_CASE("load_reviews skips records without text or rating") {
  std::istringstream in(
      R"({"reviewerID":"u1","asin":"i1","overall":5,"reviewText":"good"})"
      "\n"
      R"({"reviewerID":"u2","asin":"i1","overall":2})"
      "\n"
      R"({"reviewerID":"u3","asin":"i2","overall":1,"reviewText":"bad","category":"Books"})"
      "\n");
  const auto r = parse_reviews(in);
  CHECK(r.records.size() == 2);
  CHECK(r.skipped == 1);
  CHECK(r.malformed == 0);
  CHECK(r.records[1].category == std::optional<std::string>("Books"));
  CHECK(r.records[0].user_id == "u1");
}

TEST_CASE("load_reviews on an empty file returns nothing") {
  const auto p = test::write_scratch("empty_reviews", "r.jsonl", "");
  const auto r = load_reviews(p);
  CHECK(r.records.empty());
  CHECK(r.lines == 0);
}

TEST_CASE("load_reviews reads ten well-formed lines in file order") {
  std::string text;
  for (int k = 0; k < 10; ++k)
    text += R"({"reviewerID":"u)" + std::to_string(k) + R"(","asin":"i","overall":)" +
            std::to_string(1 + k % 5) + R"(,"reviewText":"text"})" + "\n";
  const auto r = load_reviews(test::write_scratch("ten_reviews", "r.jsonl", text));
  REQUIRE(r.records.size() == 10);
  for (int k = 0; k < 10; ++k) {
    CHECK(r.records[k].user_id == "u" + std::to_string(k));
    CHECK(r.records[k].rating >= 1.0);
    CHECK(r.records[k].rating <= 5.0);
  }
}

TEST_CASE("load_reviews tolerates a minority of malformed lines") {
  std::istringstream in(
      "not json\n"
      R"({"reviewerID":"u","asin":"i","overall":4,"reviewText":"x"})"
      "\n"
      R"({"reviewerID":"u","asin":"i","overall":4,"reviewText":"y"})"
      "\n");
  const auto r = parse_reviews(in);
  CHECK(r.records.size() == 2);
  CHECK(r.malformed == 1);
}

TEST_CASE("load_reviews fails when most lines are malformed") {
  std::istringstream in(
      "oops\n"
      R"({"reviewerID":"u","asin":"i","overall":9,"reviewText":"x"})"
      "\n"
      R"({"reviewerID":"u","asin":"i","overall":4,"reviewText":"y"})"
      "\n");
  CHECK_THROWS_AS(parse_reviews(in), IoError);
}

TEST_CASE("load_reviews rejects an unreadable path") {
  CHECK_THROWS_AS(load_reviews("/nonexistent/reviews.jsonl"), IoError);
}

TEST_CASE("derive_label") {
  CHECK(derive_label(1.0) == Polarity::Negative);
  CHECK(derive_label(5.0) == Polarity::Positive);
  CHECK_FALSE(derive_label(3.0).has_value());
  CHECK(derive_label(2.5) == Polarity::Negative);
  CHECK(derive_label(3.5) == Polarity::Positive);
  CHECK_THROWS_AS(derive_label(0.5), DomainError);
  CHECK_THROWS_AS(derive_label(5.5), DomainError);
}

TEST_CASE("derive_label partitions the labeled set") {
  std::size_t labeled = 0, threes = 0;
  for (int k = 0; k <= 40; ++k) {
    const double r = 1.0 + 0.1 * k;
    if (derive_label(r)) ++labeled;
    if (r == 3.0) ++threes;
  }
  CHECK(labeled == 41 - threes);
}

TEST_CASE("strip_markup") {
  CHECK(strip_markup("<b>great</b>") == "great");
  CHECK(strip_markup("a &amp; b") == "a & b");
  CHECK(strip_markup("nice <br product") == "nice ");
  CHECK(strip_markup("&lt;x&gt; &quot;q&quot; &#65;") == "<x> \"q\" A");
  CHECK(strip_markup("") == "");
}

TEST_CASE("expand_contractions") {
  const auto t = ContractionTable::load_default();
  CHECK(t.size() == 60);
  CHECK(expand_contractions("don't", t) == "do not");
  CHECK(expand_contractions("I'm happy", t) == "I am happy");
  CHECK(expand_contractions("can't won't", t) == "can not will not");
  CHECK(expand_contractions("isn't", t) == "is not");
  CHECK(expand_contractions("Don't", t) == "Do not");
}

TEST_CASE("number_to_words") {
  CHECK(number_to_words("5 stars") == "five stars");
  CHECK(number_to_words("0") == "zero");
  CHECK(number_to_words("123") == "one hundred twenty three");
  CHECK(spell_number(999'999'999) ==
        "nine hundred ninety nine million nine hundred ninety nine thousand nine hundred ninety "
        "nine");
  CHECK(spell_number(1'000'000) == "one million");
  CHECK(spell_number(1'010) == "one thousand ten");
  CHECK(number_to_words("mp3") == "mp three");
  CHECK(number_to_words("1234567890") == "1234567890");
}

TEST_CASE("normalize follows the documented order") {
  using P = std::pair<std::string, std::string>;
  CHECK(pairs(norm("<b>Great sound!</b> 5 stars")) ==
        std::vector<P>{{"great", "great"}, {"sound", "sound"}, {"five", "five"}, {"stars", "star"}});
  CHECK(norm("").empty());
  CHECK(norm("the the the").empty());
  CHECK(pairs(norm("It doesn't work")) == std::vector<P>{{"not", "not"}, {"work", "work"}});
}

TEST_CASE("normalize keeps only [a-z] stems outside the stopword list") {
  const auto stop = StopwordSet::load_default();
  const char* texts[] = {"Caf\xc3\xa9 o'clock 12ab 99999999999 <i>Wow!!</i> ---", "R2-D2's 3.5",
                         "\t\n  ", "Ünïcödé test being BEEN"};
  for (const char* text : texts)
    for (const auto& t : norm(text)) {
      CHECK_FALSE(stop.contains(t.stem));
      CHECK_FALSE(stop.contains(t.surface));
      for (char c : t.stem) CHECK((c >= 'a' && c <= 'z'));
    }
}

TEST_CASE("normalize is idempotent on its own output") {
  // Texts whose stems are fixed points of the stemmer.
  for (const char* text : {"<b>Great sound!</b> 5 stars", "The battery life is great",
                           "Terrible speaker, not worth it"}) {
    std::string joined;
    for (const auto& t : norm(text)) joined += t.stem + " ";
    const auto once = norm(joined);
    std::string again;
    for (const auto& t : once) again += t.stem + " ";
    CHECK(again == joined);
  }
}

TEST_CASE("stopword file has exactly 40 entries") {
  CHECK(StopwordSet::load_default().size() == 40);
}

TEST_CASE("porter_stem examples") {
  CHECK(porter_stem("caresses") == "caress");
  CHECK(porter_stem("running") == "run");
  CHECK(porter_stem("a") == "a");
  CHECK(porter_stem("ponies") == "poni");
  CHECK(porter_stem("relational") == "relat");
  CHECK(porter_stem("generalization") == "gener");
}

TEST_CASE("porter_stem matches the reference vocabulary") {
  const auto rows = read_tsv(test::test_data("porter_reference.tsv"), 2);
  REQUIRE(rows.size() > 4900);
  std::size_t mismatches = 0;
  for (const auto& r : rows)
    if (porter_stem(r[0]) != r[1]) {
      if (++mismatches <= 10) MESSAGE(r[0] << " -> " << porter_stem(r[0]) << " expected " << r[1]);
    }
  CHECK(mismatches == 0);
}

TEST_CASE("porter_stem is idempotent on the test vocabulary") {
  for (const char* w : {"caress", "run", "great", "sound", "star", "batteri", "screen", "poni",
                        "relat", "gener", "hope", "connect", "speaker", "camera"})
    CHECK(porter_stem(porter_stem(w)) == porter_stem(w));
}

TEST_CASE("build_vocabulary") {
  auto seq = [](std::vector<std::string> stems) {
    TokenSeq s;
    for (auto& st : stems) s.tokens.push_back({st, st});
    return s;
  };
  const std::vector<TokenSeq> seqs = {seq({"c", "b", "a"}), seq({"a", "b"}), seq({"b", "a"})};
  const auto v = build_vocabulary(seqs, 2);
  CHECK(v.id("a") == 1);
  CHECK(v.id("b") == 2);
  CHECK(v.id("c") == v.oov_id());
  CHECK(v.oov_id() == 3);
  CHECK(v.table_rows() == 4);
  CHECK(build_vocabulary({seq({"x"})}, 1).id("x") == 1);
  CHECK_THROWS_AS(build_vocabulary(seqs, 0), DomainError);
  CHECK_THROWS_AS(build_vocabulary({}, 1), DomainError);
  CHECK(build_vocabulary(seqs, 1).hash() == build_vocabulary(seqs, 1).hash());
  CHECK(build_vocabulary(seqs, 1).stems() == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("vocabulary round-trips through its file") {
  const auto v = Vocabulary::from_stems({"great", "sound", "star"});
  const auto p = test::scratch_dir("vocab") / "vocab.tsv";
  v.save(p);
  const auto w = Vocabulary::load(p);
  CHECK(w.stems() == v.stems());
  CHECK(w.hash() == v.hash());
}
