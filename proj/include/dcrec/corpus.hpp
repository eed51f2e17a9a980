#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace dcrec {

/// One user-item review as found in the Amazon review dumps.
struct ReviewRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;  // 1..5 stars
  std::string text;
  std::optional<std::string> category;
  /// Optional gold aspect phrases (field `aspectTerms`); only present in
  /// annotated corpora such as the bundled synthetic one.
  std::vector<std::string> aspect_terms;
};

enum class Polarity { Negative = 0, Positive = 1 };

struct LoadResult {
  std::vector<ReviewRecord> records;
  std::size_t lines = 0;      // non-blank lines seen
  std::size_t skipped = 0;    // valid JSON missing reviewText or overall
  std::size_t malformed = 0;  // unparsable or invalid field values
};

/// Reads newline-delimited JSON review records. Throws IoError if the file
/// cannot be read or more than half of the non-blank lines are malformed.
LoadResult load_reviews(const std::filesystem::path& path);
LoadResult parse_reviews(std::istream& in);

/// Star rating to two-class label: <3 negative, >3 positive, 3 unlabeled.
std::optional<Polarity> derive_label(double rating);

// ---------------------------------------------------------------------------
// Normalization chain

/// Removes `<...>` spans (an unclosed `<` drops the rest of the string) and
/// decodes &amp; &lt; &gt; &quot; &apos; and numeric character references.
std::string strip_markup(std::string_view text);

class ContractionTable {
 public:
  ContractionTable() = default;
  static ContractionTable load(const std::filesystem::path& path);
  static ContractionTable load_default();

  void add(std::string contraction, std::string expansion);
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string* find(std::string_view lowercase_key) const;

 private:
  std::map<std::string, std::string, std::less<>> entries_;
};

/// Replaces table entries (case-insensitive, whole words) and then any
/// remaining word ending in "n't" by "<stem> not". A capitalized match
/// keeps its leading capital.
std::string expand_contractions(std::string_view text, const ContractionTable& table);

/// English words for 0..999,999,999 ("one hundred twenty three").
std::string spell_number(std::uint64_t value);

/// Replaces every maximal digit run of at most nine digits by its English
/// words, separated from adjacent letters by spaces. Longer runs are kept.
std::string number_to_words(std::string_view text);

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::vector<std::string> words);
  static StopwordSet load(const std::filesystem::path& path);
  static StopwordSet load_default();

  bool contains(std::string_view w) const;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Classic Porter stemmer (original 1980 rule set). Words of length <= 2
/// are returned unchanged.
std::string porter_stem(std::string_view word);

struct Token {
  std::string surface;
  std::string stem;
  friend bool operator==(const Token&, const Token&) = default;
};

/// Full review normalization: markup, contractions, non-ASCII, numbers,
/// case, punctuation, tokenization, stopwords, stemming (in that order).
/// A token is dropped when its surface or its stem is a stopword, or when
/// it still contains a character outside [a-z].
std::vector<Token> normalize(std::string_view text, const StopwordSet& stopwords,
                             const ContractionTable& contractions);

struct TokenSeq {
  std::vector<Token> tokens;
  std::optional<Polarity> label;
  std::string user_id;
  std::string item_id;
};

/// Stem -> id. Id 0 is padding, in-vocabulary stems take 1..n in
/// descending frequency (ties lexicographic), id n+1 is out-of-vocabulary.
class Vocabulary {
 public:
  static constexpr std::size_t kPadding = 0;

  std::size_t id(std::string_view stem) const;
  std::size_t oov_id() const noexcept { return stems_.size() + 1; }
  /// Number of rows an embedding table needs: padding + stems + OOV.
  std::size_t table_rows() const noexcept { return stems_.size() + 2; }
  std::size_t size() const noexcept { return stems_.size(); }
  /// Stem with the given in-vocabulary id (1-based).
  const std::string& stem(std::size_t id) const { return stems_.at(id - 1); }
  const std::vector<std::string>& stems() const noexcept { return stems_; }

  static Vocabulary from_stems(std::vector<std::string> ordered_stems);
  /// Stable 64-bit hash of the id assignment.
  std::uint64_t hash() const noexcept;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> stems_;
  std::map<std::string, std::size_t, std::less<>> ids_;
};

Vocabulary build_vocabulary(const std::vector<TokenSeq>& seqs, std::size_t min_count);

/// Directory holding the shipped default resource files.
std::filesystem::path default_data_dir();

}  // namespace dcrec
