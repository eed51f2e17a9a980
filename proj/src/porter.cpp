// Porter stemmer, original rule set (M.F. Porter, 1980). Conditions use the
// usual notation: m = number of VC sequences in the stem, *v* = stem has a
// vowel, *d = ends in a double consonant, *o = ends consonant-vowel-consonant
// with the last consonant not w, x or y.

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "dcrec/corpus.hpp"

namespace dcrec {

namespace {

bool is_consonant(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    const bool cons = is_consonant(stem, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool has_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i)
    if (!is_consonant(stem, i)) return true;
  return false;
}

bool ends_double_consonant(std::string_view w) {
  const auto n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

bool ends_cvc(std::string_view w) {
  const auto n = w.size();
  if (n < 3) return false;
  if (!is_consonant(w, n - 3) || is_consonant(w, n - 2) || !is_consonant(w, n - 1)) return false;
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// The first rule whose suffix matches decides; if its condition fails the
// word is left unchanged by this step.
void apply_first(std::string& w, std::span<const Rule> rules, int min_measure) {
  for (const auto& r : rules) {
    if (!std::string_view(w).ends_with(r.suffix)) continue;
    const std::string_view stem(w.data(), w.size() - r.suffix.size());
    if (measure(stem) > min_measure) w = std::string(stem) + std::string(r.replacement);
    return;
  }
}

void step1a(std::string& w) {
  std::string_view v(w);
  if (v.ends_with("sses")) w.erase(w.size() - 2);
  else if (v.ends_with("ies")) w.erase(w.size() - 2);
  else if (v.ends_with("ss")) return;
  else if (v.ends_with("s")) w.pop_back();
}

void step1b(std::string& w) {
  std::string_view v(w);
  if (v.ends_with("eed")) {
    if (measure(v.substr(0, v.size() - 3)) > 0) w.pop_back();
    return;
  }
  std::size_t cut = 0;
  if (v.ends_with("ed") && has_vowel(v.substr(0, v.size() - 2))) cut = 2;
  else if (v.ends_with("ing") && has_vowel(v.substr(0, v.size() - 3))) cut = 3;
  if (cut == 0) return;
  w.erase(w.size() - cut);
  v = w;
  if (v.ends_with("at") || v.ends_with("bl") || v.ends_with("iz")) {
    w += 'e';
  } else if (ends_double_consonant(v) && v.back() != 'l' && v.back() != 's' && v.back() != 'z') {
    w.pop_back();
  } else if (measure(v) == 1 && ends_cvc(v)) {
    w += 'e';
  }
}

void step1c(std::string& w) {
  if (w.size() >= 2 && w.back() == 'y' && has_vowel(std::string_view(w).substr(0, w.size() - 1)))
    w.back() = 'i';
}

constexpr std::array<Rule, 20> kStep2{{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
    {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
    {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
    {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3{{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
}};

void step4(std::string& w) {
  static constexpr std::array<std::string_view, 19> kSuffixes{
      "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
      "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
  for (const auto s : kSuffixes) {
    if (!std::string_view(w).ends_with(s)) continue;
    const std::string_view stem(w.data(), w.size() - s.size());
    bool ok = measure(stem) > 1;
    if (ok && s == "ion") ok = !stem.empty() && (stem.back() == 's' || stem.back() == 't');
    if (ok) w.erase(stem.size());
    return;
  }
}

void step5a(std::string& w) {
  if (w.empty() || w.back() != 'e') return;
  const std::string_view stem(w.data(), w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) w.pop_back();
}

void step5b(std::string& w) {
  if (measure(w) > 1 && ends_double_consonant(w) && w.back() == 'l') w.pop_back();
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 2) return w;
  step1a(w);
  step1b(w);
  step1c(w);
  apply_first(w, kStep2, 0);
  apply_first(w, kStep3, 0);
  step4(w);
  step5a(w);
  step5b(w);
  return w;
}

}  // namespace dcrec
