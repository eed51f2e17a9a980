#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dcrec {

/// The 45 Penn Treebank tags. Indices are fixed: the 36 word tags in
/// alphabetical order, followed by the 9 punctuation tags in ASCII order.
/// Saved models depend on this order; never reorder.
enum class PosTag : std::uint8_t {
  CC, CD, DT, EX, FW, IN, JJ, JJR, JJS, LS, MD, NN, NNP, NNPS, NNS, PDT, POS, PRP,
  PRP_S, RB, RBR, RBS, RP, SYM, TO, UH, VB, VBD, VBG, VBN, VBP, VBZ, WDT, WP, WP_S, WRB,
  Hash, Dollar, CloseQuote, LeftParen, RightParen, Comma, Period, Colon, OpenQuote,
};

inline constexpr std::size_t kPosTagCount = 45;

/// Treebank spelling ("PRP$", "``", ...).
std::string_view tag_name(PosTag tag) noexcept;
std::optional<PosTag> parse_tag(std::string_view name) noexcept;
constexpr std::size_t tag_index(PosTag tag) noexcept { return static_cast<std::size_t>(tag); }

/// Unit basis vector of length 45 at the tag's index.
std::array<double, kPosTagCount> one_hot(PosTag tag) noexcept;

struct SuffixRule {
  std::string suffix;
  PosTag tag;
};

/// Word -> most frequent tag, plus ordered suffix rules and an NN default.
class TagLexicon {
 public:
  /// Default suffix rules: -ing VBG, -ed VBD, -ly RB, -s NNS, -est JJS,
  /// -er JJR; a rule needs at least `kMinStem` characters left over.
  static constexpr std::size_t kMinStem = 3;
  static std::vector<SuffixRule> default_rules();

  TagLexicon();
  static TagLexicon load(const std::filesystem::path& path);
  static TagLexicon load_default();

  /// Merges a `word<TAB>TAG` file on top of the current entries.
  void merge_file(const std::filesystem::path& path);
  void set(std::string word, PosTag tag);
  void set_rules(std::vector<SuffixRule> rules);

  PosTag tag(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }

 private:
  std::unordered_map<std::string, PosTag> words_;
  std::vector<SuffixRule> rules_;  // sorted longest suffix first
};

/// One tag per token: lexicon hit, else longest matching suffix rule, else NN.
std::vector<PosTag> tag_sequence(std::span<const std::string> tokens, const TagLexicon& lexicon);

}  // namespace dcrec
