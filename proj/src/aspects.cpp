#include "dcrec/aspects.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>

#include "dcrec/error.hpp"
#include "dcrec/linalg.hpp"
#include "dcrec/rng.hpp"
#include "dcrec/text_file.hpp"

namespace dcrec {

std::vector<TokenSpan> decode_bio(std::span<const BioTag> tags) {
  std::vector<TokenSpan> spans;
  constexpr auto none = static_cast<std::size_t>(-1);
  std::size_t open = none;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    switch (tags[t]) {
      case BioTag::B:
        if (open != none) spans.push_back({open, t});
        open = t;
        break;
      case BioTag::I:
        if (open == none) open = t;
        break;
      case BioTag::O:
        if (open != none) spans.push_back({open, t});
        open = none;
        break;
    }
  }
  if (open != none) spans.push_back({open, tags.size()});
  return spans;
}

std::vector<BioTag> encode_bio(std::span<const TokenSpan> spans, std::size_t length) {
  std::vector<BioTag> tags(length, BioTag::O);
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > length) throw DomainError("encode_bio: invalid span");
    tags[s.start] = BioTag::B;
    for (std::size_t t = s.start + 1; t < s.end; ++t) tags[t] = BioTag::I;
  }
  return tags;
}

std::vector<BioTag> tag_aspect_phrases(std::span<const Token> tokens,
                                       std::span<const std::vector<std::string>> phrase_stems) {
  std::vector<BioTag> tags(tokens.size(), BioTag::O);
  std::size_t t = 0;
  while (t < tokens.size()) {
    std::size_t best = 0;
    for (const auto& phrase : phrase_stems) {
      if (phrase.empty() || phrase.size() <= best || t + phrase.size() > tokens.size()) continue;
      bool match = true;
      for (std::size_t j = 0; j < phrase.size() && match; ++j)
        match = tokens[t + j].stem == phrase[j];
      if (match) best = phrase.size();
    }
    if (best == 0) {
      ++t;
      continue;
    }
    tags[t] = BioTag::B;
    for (std::size_t j = 1; j < best; ++j) tags[t + j] = BioTag::I;
    t += best;
  }
  return tags;
}

// ---------------------------------------------------------------------------

OpinionLexicon OpinionLexicon::load(const std::filesystem::path& lexicon,
                                    const std::filesystem::path& negations) {
  OpinionLexicon lex;
  for (const auto& f : read_tsv(lexicon, 2)) {
    double v = 0.0;
    try {
      v = std::stod(f[1]);
    } catch (const std::exception&) {
      throw IoError(lexicon.string() + ": bad polarity for '" + f[0] + "'");
    }
    if (!std::isfinite(v) || v < -1.0 || v > 1.0)
      throw IoError(lexicon.string() + ": polarity outside [-1,1] for '" + f[0] + "'");
    lex.set(f[0], v);
  }
  for (const auto& f : read_tsv(negations, 1)) lex.add_negation(f[0]);
  return lex;
}

OpinionLexicon OpinionLexicon::load_default() {
  return load(default_data_dir() / "opinion_lexicon.tsv", default_data_dir() / "negations.txt");
}

void OpinionLexicon::set(std::string stem, double polarity) {
  polarity_.insert_or_assign(std::move(stem), polarity);
}

void OpinionLexicon::add_negation(std::string word) { negations_.insert(std::move(word)); }

std::optional<double> OpinionLexicon::polarity(std::string_view stem) const {
  const auto it = polarity_.find(std::string(stem));
  if (it == polarity_.end()) return std::nullopt;
  return it->second;
}

bool OpinionLexicon::is_negation(const Token& t) const {
  return negations_.contains(t.surface) || negations_.contains(t.stem);
}

double score_mention(TokenSpan span, std::span<const Token> tokens, const OpinionLexicon& lexicon,
                     std::size_t window) {
  if (span.start >= span.end || span.end > tokens.size())
    throw DomainError("score_mention: span outside the token sequence");
  const std::size_t lo = span.start >= window ? span.start - window : 0;
  const std::size_t hi = std::min(tokens.size(), span.end + window);
  double raw = 0.0;
  for (std::size_t t = lo; t < hi; ++t) {
    if (t >= span.start && t < span.end) continue;
    const auto p = lexicon.polarity(tokens[t].stem);
    if (!p) continue;
    bool negated = false;
    for (std::size_t back = 1; back <= 2 && back <= t; ++back)
      negated = negated || lexicon.is_negation(tokens[t - back]);
    raw += negated ? -*p : *p;
  }
  return std::tanh(raw);
}

std::vector<AspectMention> extract_mentions(std::span<const BioTag> tags, const TokenSeq& seq,
                                            const OpinionLexicon& lexicon, std::size_t window) {
  if (tags.size() != seq.tokens.size()) throw ShapeError("extract_mentions: length mismatch");
  std::vector<AspectMention> out;
  for (const auto& span : decode_bio(tags)) {
    AspectMention m;
    m.user_id = seq.user_id;
    m.item_id = seq.item_id;
    m.span = span;
    m.head = seq.tokens[span.end - 1].stem;
    m.sentiment = score_mention(span, seq.tokens, lexicon, window);
    m.rating = star_rating(m.sentiment);
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void recompute_medoid(AspectCluster& c, const std::map<std::string, const AspectStem*>& by_stem) {
  double best = -std::numeric_limits<double>::infinity();
  std::string best_stem;
  for (const auto& a : c.members) {
    double s = 0.0;
    // Self-similarity is exactly 1 so that mathematical ties stay ties.
    for (const auto& b : c.members)
      s += a == b ? 1.0 : cosine(by_stem.at(a)->vector, by_stem.at(b)->vector);
    s /= static_cast<double>(c.members.size());
    if (s > best || (s == best && a < best_stem)) {
      best = s;
      best_stem = a;
    }
  }
  c.medoid = best_stem;
}

}  // namespace

std::vector<AspectCluster> cluster_aspects(std::span<const AspectStem> stems, double theta) {
  std::vector<const AspectStem*> order;
  std::map<std::string, const AspectStem*> by_stem;
  for (const auto& s : stems) {
    if (!by_stem.emplace(s.stem, &s).second)
      throw DomainError("cluster_aspects: duplicate stem '" + s.stem + "'");
    order.push_back(&s);
  }
  std::sort(order.begin(), order.end(), [](const AspectStem* a, const AspectStem* b) {
    return a->count > b->count || (a->count == b->count && a->stem < b->stem);
  });

  std::vector<AspectCluster> clusters;
  for (const auto* s : order) {
    AspectCluster* home = nullptr;
    for (auto& c : clusters) {
      if (cosine(s->vector, by_stem.at(c.medoid)->vector) >= theta) {
        home = &c;
        break;
      }
    }
    if (home == nullptr) {
      clusters.push_back({clusters.size(), {s->stem}, s->stem, 0.0});
      continue;
    }
    home->members.push_back(s->stem);
    recompute_medoid(*home, by_stem);
  }
  return clusters;
}

std::unordered_map<std::string, std::size_t> cluster_index(std::span<const AspectCluster> clusters) {
  std::unordered_map<std::string, std::size_t> idx;
  for (const auto& c : clusters)
    for (const auto& m : c.members) idx.emplace(m, c.id);
  return idx;
}

// ---------------------------------------------------------------------------

bool AspectTensor::observed(std::size_t u, std::size_t i, std::size_t k) const {
  const TensorEntry probe{u, i, k, 0.0};
  return std::binary_search(entries.begin(), entries.end(), probe,
                            [](const TensorEntry& a, const TensorEntry& b) {
                              return std::tie(a.user, a.item, a.cluster) <
                                     std::tie(b.user, b.item, b.cluster);
                            });
}

AspectTensor build_tensor(std::span<const AspectMention> mentions,
                          std::span<const AspectCluster> clusters) {
  const auto idx = cluster_index(clusters);
  AspectTensor t;
  t.clusters = clusters.size();
  std::set<std::string> users, items;
  for (const auto& m : mentions) {
    users.insert(m.user_id);
    items.insert(m.item_id);
  }
  t.users.assign(users.begin(), users.end());
  t.items.assign(items.begin(), items.end());
  auto pos = [](const std::vector<std::string>& v, const std::string& s) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), s) - v.begin());
  };
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<double, std::size_t>> acc;
  for (const auto& m : mentions) {
    const auto it = idx.find(m.head);
    if (it == idx.end()) throw DomainError("build_tensor: head stem '" + m.head + "' has no cluster");
    auto& [sum, n] = acc[{pos(t.users, m.user_id), pos(t.items, m.item_id), it->second}];
    sum += m.rating;
    ++n;
  }
  t.entries.reserve(acc.size());
  for (const auto& [key, sn] : acc)
    t.entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                         sn.first / static_cast<double>(sn.second)});
  return t;
}

// ---------------------------------------------------------------------------

namespace {

// Re-solves every row of `target` given the two fixed factors; `a_of` and
// `b_of` pick an entry's row in `fa` and `fb`.
template <typename AOf, typename BOf>
void als_mode(const AspectTensor& t, const std::vector<std::vector<std::size_t>>& rows,
              Matrix& target, const Matrix& fa, const Matrix& fb, double damping, AOf a_of,
              BOf b_of) {
  const std::size_t r = target.cols();
  const auto n = static_cast<std::ptrdiff_t>(target.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t row = 0; row < n; ++row) {
    Matrix gram(r, r);
    std::vector<double> rhs(r, 0.0), z(r);
    for (const std::size_t e : rows[static_cast<std::size_t>(row)]) {
      const auto& en = t.entries[e];
      const auto ra = fa.row(a_of(en));
      const auto rb = fb.row(b_of(en));
      for (std::size_t c = 0; c < r; ++c) z[c] = ra[c] * rb[c];
      for (std::size_t x = 0; x < r; ++x) {
        rhs[x] += en.value * z[x];
        for (std::size_t y = 0; y < r; ++y) gram(x, y) += z[x] * z[y];
      }
    }
    const auto sol = linalg::cholesky_solve(std::move(gram), std::move(rhs), damping);
    std::copy(sol.begin(), sol.end(), target.row(static_cast<std::size_t>(row)).begin());
  }
}

double cp_residual(const AspectTensor& t, const Matrix& a, const Matrix& b, const Matrix& c) {
  double num = 0.0, den = 0.0;
  for (const auto& e : t.entries) {
    double v = 0.0;
    for (std::size_t x = 0; x < a.cols(); ++x) v += a(e.user, x) * b(e.item, x) * c(e.cluster, x);
    num += (e.value - v) * (e.value - v);
    den += e.value * e.value;
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

bool all_finite(const Matrix& m) {
  return std::all_of(m.flat().begin(), m.flat().end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

CpResult cp_weights(const AspectTensor& tensor, const CpOptions& opts) {
  const std::size_t k = tensor.clusters;
  if (k < 1) throw DomainError("cp_weights: tensor has no clusters");
  if (opts.rank < 1) throw DomainError("cp_weights: rank must be >= 1");
  const std::size_t r = opts.rank;
  CpResult res;
  res.users = Matrix(tensor.users.size(), r);
  res.items = Matrix(tensor.items.size(), r);
  res.clusters = Matrix(k, r);
  if (tensor.entries.empty()) {
    res.weights.assign(k, 1.0 / static_cast<double>(k));
    return res;
  }

  Lcg64 rng(opts.seed);
  for (auto* m : {&res.users, &res.items, &res.clusters})
    for (auto& x : m->flat()) x = rng.uniform();

  std::vector<std::vector<std::size_t>> by_user(tensor.users.size()), by_item(tensor.items.size()),
      by_cluster(k);
  for (std::size_t e = 0; e < tensor.entries.size(); ++e) {
    const auto& en = tensor.entries[e];
    if (en.user >= tensor.users.size() || en.item >= tensor.items.size() || en.cluster >= k)
      throw DomainError("cp_weights: entry index out of range");
    by_user[en.user].push_back(e);
    by_item[en.item].push_back(e);
    by_cluster[en.cluster].push_back(e);
  }
  auto user_of = [](const TensorEntry& e) { return e.user; };
  auto item_of = [](const TensorEntry& e) { return e.item; };
  auto cluster_of = [](const TensorEntry& e) { return e.cluster; };

  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    als_mode(tensor, by_user, res.users, res.items, res.clusters, opts.damping, item_of,
             cluster_of);
    als_mode(tensor, by_item, res.items, res.users, res.clusters, opts.damping, user_of,
             cluster_of);
    als_mode(tensor, by_cluster, res.clusters, res.users, res.items, opts.damping, user_of,
             item_of);
    // Move the scale of the user and item columns into the cluster factor.
    for (std::size_t c = 0; c < r; ++c) {
      double na = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < res.users.rows(); ++i) na += res.users(i, c) * res.users(i, c);
      for (std::size_t i = 0; i < res.items.rows(); ++i) nb += res.items(i, c) * res.items(i, c);
      na = std::sqrt(na);
      nb = std::sqrt(nb);
      if (na == 0.0 || nb == 0.0) continue;
      for (std::size_t i = 0; i < res.users.rows(); ++i) res.users(i, c) /= na;
      for (std::size_t i = 0; i < res.items.rows(); ++i) res.items(i, c) /= nb;
      for (std::size_t i = 0; i < k; ++i) res.clusters(i, c) *= na * nb;
    }
    if (!all_finite(res.users) || !all_finite(res.items) || !all_finite(res.clusters))
      throw NumericError("cp_weights: non-finite factors at iteration " + std::to_string(it));
    res.iterations = it + 1;
    const double resid = cp_residual(tensor, res.users, res.items, res.clusters);
    res.relative_residual = resid;
    if (std::abs(prev - resid) < opts.tol) break;
    prev = resid;
  }

  res.weights.assign(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    res.weights[i] = dot(res.clusters.row(i), res.clusters.row(i));
    total += res.weights[i];
  }
  if (total > 0.0) {
    for (auto& w : res.weights) w /= total;
  } else {
    res.weights.assign(k, 1.0 / static_cast<double>(k));
  }
  return res;
}

std::vector<RatingTriple> weighted_rating_matrix(const AspectTensor& tensor,
                                                 std::span<const double> weights,
                                                 std::span<const RatingTriple> overall,
                                                 double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("weighted_rating_matrix: alpha outside [0,1]");
  if (weights.size() != tensor.clusters) throw ShapeError("weighted_rating_matrix: weight count");

  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::pair<double, std::size_t>> stars;
  for (const auto& r : overall) {
    auto& [sum, n] = stars[{r.user, r.item}];
    sum += r.value;
    ++n;
  }
  std::map<Key, std::pair<double, double>> aspect;  // (sum w*a, sum w)
  for (const auto& e : tensor.entries) {
    auto& [wa, w] = aspect[{tensor.users[e.user], tensor.items[e.item]}];
    wa += weights[e.cluster] * e.value;
    w += weights[e.cluster];
  }

  std::map<Key, double> out;
  for (const auto& [key, sn] : stars) out[key] = sn.first / static_cast<double>(sn.second);
  for (const auto& [key, aw] : aspect) {
    if (aw.second <= 0.0) continue;
    const double a = aw.first / aw.second;
    const auto it = out.find(key);
    if (it == out.end()) {
      out[key] = a;
    } else {
      it->second = alpha * it->second + (1.0 - alpha) * a;
    }
  }
  std::vector<RatingTriple> result;
  result.reserve(out.size());
  for (const auto& [key, v] : out) result.push_back({key.first, key.second, v});
  return result;
}

}  // namespace dcrec
