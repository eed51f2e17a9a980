#include "dcrec/tagger.hpp"

#include <algorithm>

#include "dcrec/corpus.hpp"
#include "dcrec/error.hpp"
#include "dcrec/text_file.hpp"

namespace dcrec {

namespace {
constexpr std::array<std::string_view, kPosTagCount> kNames{
    "CC",  "CD",  "DT",  "EX",  "FW",  "IN",  "JJ",  "JJR", "JJS", "LS",   "MD", "NN",
    "NNP", "NNPS", "NNS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM",
    "TO",  "UH",  "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP",  "WP$", "WRB",
    "#",   "$",   "''",  "(",   ")",   ",",   ".",   ":",   "``"};
}  // namespace

std::string_view tag_name(PosTag tag) noexcept { return kNames[tag_index(tag)]; }

std::optional<PosTag> parse_tag(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<PosTag>(i);
  return std::nullopt;
}

std::array<double, kPosTagCount> one_hot(PosTag tag) noexcept {
  std::array<double, kPosTagCount> v{};
  v[tag_index(tag)] = 1.0;
  return v;
}

std::vector<SuffixRule> TagLexicon::default_rules() {
  return {{"ing", PosTag::VBG}, {"ed", PosTag::VBD},  {"ly", PosTag::RB},
          {"s", PosTag::NNS},   {"est", PosTag::JJS}, {"er", PosTag::JJR}};
}

TagLexicon::TagLexicon() { set_rules(default_rules()); }

TagLexicon TagLexicon::load(const std::filesystem::path& path) {
  TagLexicon lex;
  lex.merge_file(path);
  return lex;
}

TagLexicon TagLexicon::load_default() { return load(default_data_dir() / "tagger_lexicon.tsv"); }

void TagLexicon::merge_file(const std::filesystem::path& path) {
  for (const auto& f : read_tsv(path, 2)) {
    const auto tag = parse_tag(f[1]);
    if (!tag) throw IoError(path.string() + ": unknown tag '" + f[1] + "'");
    set(f[0], *tag);
  }
}

void TagLexicon::set(std::string word, PosTag tag) { words_.insert_or_assign(std::move(word), tag); }

void TagLexicon::set_rules(std::vector<SuffixRule> rules) {
  std::stable_sort(rules.begin(), rules.end(), [](const SuffixRule& a, const SuffixRule& b) {
    return a.suffix.size() > b.suffix.size();
  });
  rules_ = std::move(rules);
}

PosTag TagLexicon::tag(std::string_view word) const {
  if (const auto it = words_.find(std::string(word)); it != words_.end()) return it->second;
  for (const auto& r : rules_) {
    if (word.size() >= r.suffix.size() + kMinStem && word.ends_with(r.suffix)) return r.tag;
  }
  return PosTag::NN;
}

std::vector<PosTag> tag_sequence(std::span<const std::string> tokens, const TagLexicon& lexicon) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(lexicon.tag(t));
  return tags;
}

}  // namespace dcrec
