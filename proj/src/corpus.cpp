#include "dcrec/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dcrec/error.hpp"
#include "dcrec/rng.hpp"
#include "dcrec/text_file.hpp"

namespace dcrec {

using json = nlohmann::json;

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes one entity starting at text[i] == '&'. Returns the number of
// bytes consumed, 0 when the text is not a recognized entity.
std::size_t decode_entity(std::string_view text, std::size_t i, std::string& out) {
  const auto semi = text.find(';', i);
  if (semi == std::string_view::npos || semi - i > 10) return 0;
  const auto name = text.substr(i + 1, semi - i - 1);
  static constexpr std::array<std::pair<std::string_view, char>, 5> named{
      {{"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}}};
  for (const auto& [n, c] : named) {
    if (name == n) {
      out += c;
      return semi - i + 1;
    }
  }
  if (name.size() >= 2 && name[0] == '#') {
    const bool hex = name[1] == 'x' || name[1] == 'X';
    const auto digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    std::uint32_t cp = 0;
    for (char c : digits) {
      const int d = hex ? (std::isxdigit(static_cast<unsigned char>(c))
                               ? (std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                             : lower(c) - 'a' + 10)
                               : -1)
                        : (std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : -1);
      if (d < 0) return 0;
      cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(d);
      if (cp > 0x10FFFF) return 0;
    }
    append_utf8(out, cp);
    return semi - i + 1;
  }
  return 0;
}

constexpr std::array<std::string_view, 20> kOnes{
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 10> kTens{
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

void spell_below_thousand(std::uint64_t n, std::vector<std::string_view>& words) {
  if (n >= 100) {
    words.push_back(kOnes[n / 100]);
    words.push_back("hundred");
    n %= 100;
  }
  if (n >= 20) {
    words.push_back(kTens[n / 10]);
    n %= 10;
    if (n) words.push_back(kOnes[n]);
  } else if (n > 0) {
    words.push_back(kOnes[n]);
  }
}

}  // namespace

std::filesystem::path default_data_dir() {
#ifdef DCREC_DATA_DIR
  return DCREC_DATA_DIR;
#else
  return "data";
#endif
}

// ---------------------------------------------------------------------------

LoadResult parse_reviews(std::istream& in) {
  LoadResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.lines;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      ++result.malformed;
      continue;
    }
    const auto text = j.find("reviewText");
    const auto overall = j.find("overall");
    if (text == j.end() || overall == j.end() || text->is_null() || overall->is_null()) {
      ++result.skipped;
      continue;
    }
    const auto user = j.find("reviewerID");
    const auto item = j.find("asin");
    if (!text->is_string() || !overall->is_number() || user == j.end() || item == j.end() ||
        !user->is_string() || !item->is_string()) {
      ++result.malformed;
      continue;
    }
    ReviewRecord r;
    r.user_id = user->get<std::string>();
    r.item_id = item->get<std::string>();
    r.rating = overall->get<double>();
    r.text = text->get<std::string>();
    if (r.user_id.empty() || r.item_id.empty() || !std::isfinite(r.rating) || r.rating < 1.0 ||
        r.rating > 5.0) {
      ++result.malformed;
      continue;
    }
    if (auto c = j.find("category"); c != j.end() && c->is_string())
      r.category = c->get<std::string>();
    if (auto a = j.find("aspectTerms"); a != j.end() && a->is_array()) {
      for (const auto& t : *a)
        if (t.is_string()) r.aspect_terms.push_back(t.get<std::string>());
    }
    result.records.push_back(std::move(r));
  }
  if (result.malformed > 0) {
    std::clog << "warning: " << result.malformed << " malformed review line(s) skipped\n";
    if (2 * result.malformed > result.lines)
      throw IoError("more than half of the review lines are malformed (" +
                    std::to_string(result.malformed) + "/" + std::to_string(result.lines) + ")");
  }
  return result;
}

LoadResult load_reviews(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open review file: " + path.string());
  return parse_reviews(in);
}

std::optional<Polarity> derive_label(double rating) {
  if (!std::isfinite(rating) || rating < 1.0 || rating > 5.0)
    throw DomainError("rating outside [1,5]: " + std::to_string(rating));
  if (rating < 3.0) return Polarity::Negative;
  if (rating > 3.0) return Polarity::Positive;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string strip_markup(std::string_view text) {
  std::string no_tags;
  no_tags.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<') {
      const auto close = text.find('>', i + 1);
      if (close == std::string_view::npos) break;
      i = close;
      continue;
    }
    no_tags += text[i];
  }
  std::string out;
  out.reserve(no_tags.size());
  for (std::size_t i = 0; i < no_tags.size(); ++i) {
    if (no_tags[i] == '&') {
      if (const auto used = decode_entity(no_tags, i, out); used > 0) {
        i += used - 1;
        continue;
      }
    }
    out += no_tags[i];
  }
  return out;
}

ContractionTable ContractionTable::load(const std::filesystem::path& path) {
  ContractionTable t;
  for (const auto& fields : read_tsv(path, 2)) t.add(fields[0], fields[1]);
  return t;
}

ContractionTable ContractionTable::load_default() {
  return load(default_data_dir() / "contractions.tsv");
}

void ContractionTable::add(std::string contraction, std::string expansion) {
  std::transform(contraction.begin(), contraction.end(), contraction.begin(), lower);
  entries_.insert_or_assign(std::move(contraction), std::move(expansion));
}

const std::string* ContractionTable::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string expand_contractions(std::string_view input, const ContractionTable& table) {
  // Typographic apostrophe (U+2019) behaves like '.
  std::string text;
  text.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.substr(i, 3) == "\xE2\x80\x99") {
      text += '\'';
      i += 2;
    } else {
      text += input[i];
    }
  }

  std::string out;
  out.reserve(text.size() + 16);
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      out += text[i++];
      continue;
    }
    // A word: alphanumerics joined by single inner apostrophes.
    std::size_t j = i;
    while (j < text.size() &&
           (is_word_char(text[j]) ||
            (text[j] == '\'' && j + 1 < text.size() && is_word_char(text[j + 1]))))
      ++j;
    const std::string_view word(text.data() + i, j - i);
    std::string key(word);
    std::transform(key.begin(), key.end(), key.begin(), lower);

    std::string expansion;
    if (const auto* hit = table.find(key)) {
      expansion = *hit;
    } else if (key.size() > 3 && key.ends_with("n't")) {
      expansion = std::string(word.substr(0, word.size() - 3)) + " not";
    } else {
      out += word;
      i = j;
      continue;
    }
    if (std::isupper(static_cast<unsigned char>(word[0])) && !expansion.empty())
      expansion[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(expansion[0])));
    out += expansion;
    i = j;
  }
  return out;
}

std::string spell_number(std::uint64_t value) {
  if (value > 999'999'999ULL) throw DomainError("spell_number: value above 999,999,999");
  if (value == 0) return "zero";
  std::vector<std::string_view> words;
  const std::uint64_t millions = value / 1'000'000;
  const std::uint64_t thousands = (value / 1'000) % 1'000;
  const std::uint64_t rest = value % 1'000;
  if (millions) {
    spell_below_thousand(millions, words);
    words.push_back("million");
  }
  if (thousands) {
    spell_below_thousand(thousands, words);
    words.push_back("thousand");
  }
  spell_below_thousand(rest, words);
  std::string out;
  for (const auto w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string number_to_words(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 16);
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      out += text[i++];
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view run = text.substr(i, j - i);
    const bool letter_before = i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1]));
    const bool letter_after = j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]));
    if (letter_before) out += ' ';
    if (run.size() > 9) {
      out += run;
    } else {
      std::uint64_t v = 0;
      for (char c : run) v = v * 10 + static_cast<std::uint64_t>(c - '0');
      out += spell_number(v);
    }
    if (letter_after) out += ' ';
    i = j;
  }
  return out;
}

StopwordSet::StopwordSet(std::vector<std::string> words) {
  for (auto& w : words) words_.insert(std::move(w));
}

StopwordSet StopwordSet::load(const std::filesystem::path& path) {
  std::vector<std::string> words;
  for (const auto& fields : read_tsv(path, 1)) words.push_back(fields[0]);
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::load_default() { return load(default_data_dir() / "stopwords.txt"); }

bool StopwordSet::contains(std::string_view w) const {
  return words_.find(std::string(w)) != words_.end();
}

std::vector<Token> normalize(std::string_view text, const StopwordSet& stopwords,
                             const ContractionTable& contractions) {
  std::string s = strip_markup(text);
  s = expand_contractions(s, contractions);
  std::erase_if(s, [](char c) { return static_cast<unsigned char>(c) >= 0x80; });
  s = number_to_words(s);
  std::transform(s.begin(), s.end(), s.begin(), lower);
  std::string cleaned;
  cleaned.reserve(s.size());
  for (char c : s) {
    if (c == '\'') continue;
    cleaned += std::ispunct(static_cast<unsigned char>(c)) ? ' ' : c;
  }

  std::vector<Token> tokens;
  std::istringstream words(cleaned);
  std::string w;
  while (words >> w) {
    if (stopwords.contains(w)) continue;
    if (!std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) continue;
    std::string stem = porter_stem(w);
    if (stopwords.contains(stem)) continue;
    tokens.push_back({std::move(w), std::move(stem)});
  }
  return tokens;
}

// ---------------------------------------------------------------------------

std::size_t Vocabulary::id(std::string_view stem) const {
  const auto it = ids_.find(stem);
  return it == ids_.end() ? oov_id() : it->second;
}

Vocabulary Vocabulary::from_stems(std::vector<std::string> ordered_stems) {
  Vocabulary v;
  v.stems_ = std::move(ordered_stems);
  for (std::size_t i = 0; i < v.stems_.size(); ++i) {
    if (!v.ids_.emplace(v.stems_[i], i + 1).second)
      throw DomainError("duplicate vocabulary stem: " + v.stems_[i]);
  }
  return v;
}

std::uint64_t Vocabulary::hash() const noexcept {
  std::uint64_t h = fnv1a("vocab");
  for (const auto& s : stems_) {
    h = fnv1a(s, h);
    h = fnv1a(std::string_view("\n", 1), h);
  }
  return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary: " + path.string());
  out << "# id<TAB>stem; 0 = padding, " << oov_id() << " = out-of-vocabulary\n";
  for (std::size_t i = 0; i < stems_.size(); ++i) out << (i + 1) << '\t' << stems_[i] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::vector<std::string> stems;
  for (const auto& fields : read_tsv(path, 2)) {
    if (std::stoull(fields[0]) != stems.size() + 1)
      throw IoError("vocabulary ids are not contiguous in " + path.string());
    stems.push_back(fields[1]);
  }
  return from_stems(std::move(stems));
}

Vocabulary build_vocabulary(const std::vector<TokenSeq>& seqs, std::size_t min_count) {
  if (min_count < 1) throw DomainError("build_vocabulary: min_count must be >= 1");
  std::map<std::string, std::size_t, std::less<>> counts;
  std::size_t total = 0;
  for (const auto& seq : seqs)
    for (const auto& t : seq.tokens) {
      ++counts[t.stem];
      ++total;
    }
  if (total == 0) throw DomainError("build_vocabulary: empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [stem, n] : counts)
    if (n >= min_count) kept.emplace_back(stem, n);
  // counts is already lexicographic, so a stable sort on frequency keeps
  // the lexicographic tie order.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> stems;
  stems.reserve(kept.size());
  for (auto& [stem, n] : kept) stems.push_back(std::move(stem));
  return Vocabulary::from_stems(std::move(stems));
}

}  // namespace dcrec
