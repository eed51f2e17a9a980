#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dcrec/corpus.hpp"
#include "dcrec/dcnn.hpp"
#include "dcrec/matrix.hpp"

namespace dcrec {

/// Half-open token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
  friend auto operator<=>(const TokenSpan&, const TokenSpan&) = default;
};

/// Maximal B I* runs. An I after O (or at position 0) opens a new span.
std::vector<TokenSpan> decode_bio(std::span<const BioTag> tags);
/// Inverse of decode_bio for non-overlapping spans.
std::vector<BioTag> encode_bio(std::span<const TokenSpan> spans, std::size_t length);

/// Gold tags for a token sequence: every occurrence of an aspect phrase
/// (as a run of stems) is tagged B I*. Longer phrases win on overlap.
std::vector<BioTag> tag_aspect_phrases(std::span<const Token> tokens,
                                       std::span<const std::vector<std::string>> phrase_stems);

class OpinionLexicon {
 public:
  OpinionLexicon() = default;
  static OpinionLexicon load(const std::filesystem::path& lexicon,
                             const std::filesystem::path& negations);
  static OpinionLexicon load_default();

  void set(std::string stem, double polarity);
  void add_negation(std::string word);

  std::optional<double> polarity(std::string_view stem) const;
  bool is_negation(const Token& t) const;
  std::size_t size() const noexcept { return polarity_.size(); }

 private:
  std::unordered_map<std::string, double> polarity_;
  std::unordered_set<std::string> negations_;
};

struct AspectMention {
  std::string user_id;
  std::string item_id;
  TokenSpan span;
  std::string head;         // stem of the last token in the span
  double sentiment = 0.0;   // s in (-1, 1)
  double rating = 3.0;      // 3 + 2s
};

/// s = tanh(sum of lexicon polarities within `window` tokens on either side
/// of the span), each polarity flipped when a negation occurs in the two
/// tokens before the opinion word.
double score_mention(TokenSpan span, std::span<const Token> tokens, const OpinionLexicon& lexicon,
                     std::size_t window = 4);
inline double star_rating(double sentiment) { return 3.0 + 2.0 * sentiment; }

std::vector<AspectMention> extract_mentions(std::span<const BioTag> tags, const TokenSeq& seq,
                                            const OpinionLexicon& lexicon,
                                            std::size_t window = 4);

struct AspectStem {
  std::string stem;
  std::size_t count = 0;
  std::vector<double> vector;
};

struct AspectCluster {
  std::size_t id = 0;
  std::vector<std::string> members;  // in join order
  std::string medoid;
  double weight = 0.0;
};

/// Greedy single pass in descending count (ties by stem): each stem joins
/// the first cluster whose medoid has cosine >= theta, otherwise founds a
/// new one. The medoid maximizes mean cosine to all members (itself
/// included), ties to the lexicographically smallest stem.
std::vector<AspectCluster> cluster_aspects(std::span<const AspectStem> stems, double theta = 0.6);

/// Stem -> cluster id lookup.
std::unordered_map<std::string, std::size_t> cluster_index(std::span<const AspectCluster> clusters);

struct TensorEntry {
  std::size_t user = 0;
  std::size_t item = 0;
  std::size_t cluster = 0;
  double value = 0.0;
};

/// Sparse user x item x cluster tensor of mean aspect star ratings. Users
/// and items are indexed in lexicographic id order.
struct AspectTensor {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::size_t clusters = 0;
  std::vector<TensorEntry> entries;  // sorted by (user, item, cluster), unique

  bool observed(std::size_t u, std::size_t i, std::size_t k) const;
};

AspectTensor build_tensor(std::span<const AspectMention> mentions,
                          std::span<const AspectCluster> clusters);

struct CpOptions {
  std::size_t rank = 3;
  std::size_t max_iters = 500;
  double tol = 1e-12;  // stop when the relative fit changes less than this
  double damping = 1e-6;
  std::uint64_t seed = 0;
};

struct CpResult {
  std::vector<double> weights;  // per cluster, sums to 1
  Matrix users;                 // U x r, unit-norm columns
  Matrix items;                 // I x r, unit-norm columns
  Matrix clusters;              // K x r, carries the scale
  double relative_residual = 0.0;  // ||T - T_hat|| / ||T|| over observed entries
  std::size_t iterations = 0;
};

/// Masked CP decomposition by alternating least squares over observed
/// entries only, then w_k = ||C_k||^2 / sum_j ||C_j||^2.
CpResult cp_weights(const AspectTensor& tensor, const CpOptions& opts);

struct RatingTriple {
  std::string user;
  std::string item;
  double value = 0.0;
};

/// r' = alpha * r + (1 - alpha) * (sum_k w_k a_uik / sum_k w_k) over the
/// clusters observed for (u, i); r alone without aspects, the aspect term
/// alone without an overall rating. Duplicate overall ratings for one pair
/// are averaged. Output sorted by (user, item).
std::vector<RatingTriple> weighted_rating_matrix(const AspectTensor& tensor,
                                                 std::span<const double> weights,
                                                 std::span<const RatingTriple> overall,
                                                 double alpha = 0.5);

}  // namespace dcrec
