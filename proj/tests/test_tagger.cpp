#include <doctest.h>

#include <set>

#include "dcrec/tagger.hpp"
#include "test_util.hpp"

using namespace dcrec;

TEST_CASE("tag_sequence examples") {
  TagLexicon lex;
  lex.set("great", PosTag::JJ);
  lex.set("sound", PosTag::NN);
  const std::vector<std::string> a = {"great", "sound"};
  CHECK(tag_sequence(a, lex) == std::vector<PosTag>{PosTag::JJ, PosTag::NN});
  const std::vector<std::string> b = {"blorping"};
  CHECK(tag_sequence(b, lex) == std::vector<PosTag>{PosTag::VBG});
  const std::vector<std::string> c = {"zzqq"};
  CHECK(tag_sequence(c, lex) == std::vector<PosTag>{PosTag::NN});
}

TEST_CASE("suffix rules: longest first, minimum stem length") {
  TagLexicon lex;
  CHECK(lex.tag("quickly") == PosTag::RB);
  CHECK(lex.tag("tallest") == PosTag::JJS);
  CHECK(lex.tag("louder") == PosTag::JJR);
  CHECK(lex.tag("jumped") == PosTag::VBD);
  CHECK(lex.tag("widgets") == PosTag::NNS);
  CHECK(lex.tag("sing") == PosTag::NN);  // "s" + "ing" leaves 1 < 3 characters
  CHECK(lex.tag("bus") == PosTag::NN);   // "bu" is too short
  lex.set_rules({{"s", PosTag::NNS}, {"ess", PosTag::NN}});
  CHECK(lex.tag("goddess") == PosTag::NN);
}

TEST_CASE("lexicon files load and merge") {
  const auto dir = test::scratch_dir("tagger");
  write_file(dir / "base.tsv", "# comment\nrun\tVB\nfast\tRB\n");
  write_file(dir / "over.tsv", "fast\tJJ\n");
  auto lex = TagLexicon::load(dir / "base.tsv");
  CHECK(lex.tag("fast") == PosTag::RB);
  lex.merge_file(dir / "over.tsv");
  CHECK(lex.tag("fast") == PosTag::JJ);
  CHECK(lex.tag("run") == PosTag::VB);
  CHECK(TagLexicon::load_default().size() >= 4000);
}

TEST_CASE("tag_sequence is total and length preserving") {
  const auto lex = TagLexicon::load_default();
  const std::vector<std::string> words = {"the", "battery", "lasts", "amazingly", "long", "", "x"};
  const auto tags = tag_sequence(words, lex);
  CHECK(tags.size() == words.size());
  CHECK(tag_sequence(words, lex) == tags);
}

TEST_CASE("one_hot") {
  const auto cc = one_hot(PosTag::CC);
  CHECK(cc[0] == 1.0);
  for (std::size_t k = 1; k < kPosTagCount; ++k) CHECK(cc[k] == 0.0);
  for (std::size_t a = 0; a < kPosTagCount; ++a) {
    const auto va = one_hot(static_cast<PosTag>(a));
    double sum = 0.0;
    for (double x : va) sum += x;
    CHECK(sum == 1.0);
    for (std::size_t b = 0; b < kPosTagCount; ++b) {
      const auto vb = one_hot(static_cast<PosTag>(b));
      double d = 0.0;
      for (std::size_t k = 0; k < kPosTagCount; ++k) d += va[k] * vb[k];
      CHECK(d == (a == b ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("tag names are stable and round-trip") {
  CHECK(tag_name(PosTag::CC) == "CC");
  CHECK(tag_name(PosTag::PRP_S) == "PRP$");
  CHECK(tag_name(PosTag::WRB) == "WRB");
  CHECK(tag_index(PosTag::WRB) == 35);
  CHECK(tag_name(PosTag::OpenQuote) == "``");
  std::set<std::string_view> names;
  for (std::size_t k = 0; k < kPosTagCount; ++k) {
    const auto t = static_cast<PosTag>(k);
    names.insert(tag_name(t));
    CHECK(parse_tag(tag_name(t)) == t);
  }
  CHECK(names.size() == 45);
  CHECK_FALSE(parse_tag("XYZ").has_value());
}
