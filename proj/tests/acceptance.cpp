// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances and fixture sizes are fixed below.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dcrec/aspects.hpp"
#include "dcrec/balance.hpp"
#include "dcrec/cli.hpp"
#include "dcrec/corpus.hpp"
#include "dcrec/dcnn.hpp"
#include "dcrec/embedding.hpp"
#include "dcrec/eval.hpp"
#include "dcrec/recommend.hpp"
#include "dcrec/rng.hpp"
#include "dcrec/tagger.hpp"
#include "dcrec/text_file.hpp"

using namespace dcrec;
namespace fs = std::filesystem;

namespace {

constexpr double kGradEps = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr double kGradSeconds = 60;
constexpr double kOverfitTarget = 0.95;
constexpr std::size_t kOverfitEpochs = 200;
constexpr double kOverfitSeconds = 300;
constexpr double kSegmentTol = 1e-9;
constexpr double kPipelineF1 = 0.90;
constexpr double kPipelineSeconds = 600;
constexpr double kRatingRmse = 0.25;
constexpr double kRatingVsMean = 0.5;
constexpr double kRatingVsMf = 1.05;
constexpr double kMetricTol = 1e-12;
constexpr double kSvdTol = 1e-6;
constexpr double kCpTol = 1e-4;
constexpr double kCpScaleTol = 1e-6;

const fs::path kSynthetic = fs::path(DCREC_DATA_DIR) / "synthetic";

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void info(const std::string& s) { std::printf("INFO  %s\n", s.c_str()); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dcrec_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1 -------------------------------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  DcnnConfig c;
  c.seq_len = 12;
  c.word_dim = 8;
  c.word_filters = 8;
  c.pos_filters = 4;
  const DcnnModel model(c, 101);
  Lcg64 rng(202);
  DcnnSample s;
  s.input.word = Matrix(c.seq_len, c.word_dim);
  s.input.pos = Matrix(c.seq_len, c.pos_dim);
  s.input.length = 10;
  for (std::size_t t = 0; t < s.input.length; ++t) {
    for (std::size_t d = 0; d < c.word_dim; ++d) s.input.word(t, d) = rng.uniform(-1, 1);
    s.input.pos(t, rng.below(c.pos_dim)) = 1.0;
    s.tags.push_back(static_cast<BioTag>(rng.below(3)));
  }
  s.label = Polarity::Positive;
  const auto r = gradient_check(model, s, kGradEps, kGradTol);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = r.passed() && r.checked == model.params().count() && r.max_relative_error <= kGradTol &&
           secs < kGradSeconds;
  o.detail = "max relative error " + fmt("%.3g", r.max_relative_error) + " over " +
             std::to_string(r.checked) + " parameters (worst " + r.worst_parameter + "), " +
             fmt("%.1f s", secs);
  return o;
}

// 2 -------------------------------------------------------------------------

struct TaggedCorpus {
  std::vector<DcnnSample> samples;
  std::vector<std::vector<BioTag>> gold;  // full-length gold tags
};

// The first `n` labeled reviews of the bundled corpus, normalized, tagged
// and embedded as the pipeline does.
TaggedCorpus planted_corpus(std::size_t n, const DcnnConfig& c) {
  const auto loaded = load_reviews(kSynthetic / "reviews.jsonl");
  const auto stop = StopwordSet::load_default();
  const auto contr = ContractionTable::load_default();
  const auto lex = TagLexicon::load_default();
  std::vector<TokenSeq> seqs;
  std::vector<std::vector<BioTag>> gold;
  for (const auto& rec : loaded.records) {
    if (seqs.size() == n) break;
    const auto label = derive_label(rec.rating);
    if (!label) continue;
    TokenSeq s;
    s.tokens = normalize(rec.text, stop, contr);
    s.label = label;
    std::vector<std::vector<std::string>> phrases;
    for (const auto& term : rec.aspect_terms) {
      std::vector<std::string> stems;
      for (const auto& t : normalize(term, stop, contr)) stems.push_back(t.stem);
      if (!stems.empty()) phrases.push_back(stems);
    }
    gold.push_back(tag_aspect_phrases(s.tokens, phrases));
    seqs.push_back(std::move(s));
  }
  const auto vocab = build_vocabulary(seqs, 1);
  const auto emb = EmbeddingTable::build(vocab, WordVectors::load(kSynthetic / "embeddings.txt"));
  TaggedCorpus out;
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    std::vector<std::size_t> ids;
    std::vector<std::string> surfaces;
    for (const auto& t : seqs[k].tokens) {
      ids.push_back(vocab.id(t.stem));
      surfaces.push_back(t.surface);
    }
    DcnnSample s;
    s.input.word = emb.embed(ids, c.seq_len);
    s.input.pos = pos_matrix(tag_sequence(surfaces, lex), c.seq_len);
    s.input.length = std::min(c.seq_len, ids.size());
    s.tags.assign(gold[k].begin(), gold[k].begin() + static_cast<std::ptrdiff_t>(s.input.length));
    s.label = seqs[k].label;
    out.samples.push_back(std::move(s));
  }
  out.gold = std::move(gold);
  return out;
}

std::pair<double, double> train_accuracy(const DcnnModel& model, const TaggedCorpus& corpus) {
  std::size_t tok_hit = 0, tok_total = 0, sent_hit = 0;
  for (const auto& s : corpus.samples) {
    const auto p = predict(model, s.input);
    for (std::size_t t = 0; t < s.tags.size(); ++t) tok_hit += p.tags[t] == s.tags[t];
    tok_total += s.tags.size();
    const auto label = p.sentiment_prob >= 0.5 ? Polarity::Positive : Polarity::Negative;
    sent_hit += label == *s.label;
  }
  return {static_cast<double>(tok_hit) / static_cast<double>(tok_total),
          static_cast<double>(sent_hit) / static_cast<double>(corpus.samples.size())};
}

Outcome overfit_sanity() {
  const auto t0 = Clock::now();
  DcnnConfig c;
  c.seq_len = 32;
  c.word_dim = 50;
  c.word_filters = 32;
  c.pos_filters = 8;
  const auto corpus = planted_corpus(64, c);
  DcnnModel model(c, 7);
  TrainOptions o;
  o.epochs = kOverfitEpochs;
  o.batch_size = 16;
  o.learning_rate = 1e-3;
  o.seed = 11;
  std::size_t reached = 0;
  std::pair<double, double> acc{0, 0};
  o.on_epoch = [&](std::size_t epoch, double) {
    acc = train_accuracy(model, corpus);
    if (acc.first >= kOverfitTarget && acc.second >= kOverfitTarget) {
      reached = epoch + 1;
      return false;
    }
    return true;
  };
  train(model, corpus.samples, o);
  const double secs = seconds_since(t0);
  Outcome out;
  out.pass = corpus.samples.size() == 64 && reached > 0 && secs < kOverfitSeconds;
  out.detail = std::to_string(corpus.samples.size()) + " samples, token accuracy " +
               fmt("%.4f", acc.first) + ", sentiment accuracy " + fmt("%.4f", acc.second) +
               (reached ? " after " + std::to_string(reached) + " epochs" : " after 200 epochs") +
               ", " + fmt("%.1f s", secs);
  return out;
}

// 3 -------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> brute_knn(const Matrix& pts, std::size_t k) {
  std::vector<std::vector<std::size_t>> out(pts.rows());
  for (std::size_t i = 0; i < pts.rows(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.rows(); ++j) {
      if (i == j) continue;
      double s = 0;
      for (std::size_t c = 0; c < pts.cols(); ++c) s += (pts(i, c) - pts(j, c)) * (pts(i, c) - pts(j, c));
      d.emplace_back(s, j);
    }
    std::sort(d.begin(), d.end());
    for (std::size_t q = 0; q < k; ++q) out[i].push_back(d[q].second);
  }
  return out;
}

Outcome smote_correctness() {
  Lcg64 rng(303);
  const std::size_t n = 200, dim = 12, k = 5;
  std::vector<FeatureSample> samples;
  Matrix all(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureSample s;
    s.label = i % 10 < 3 ? Polarity::Negative : Polarity::Positive;
    for (std::size_t c = 0; c < dim; ++c) {
      // Coarse grid so distance ties occur and exercise the index rule.
      const double x = std::round(2.0 * rng.normal()) / 2.0;
      s.features.push_back(x);
      all(i, c) = x;
    }
    samples.push_back(std::move(s));
  }
  const auto r = smote(samples, k, 404);
  std::size_t pos = 0, neg = 0;
  for (const auto& s : r.samples) (s.label == Polarity::Positive ? pos : neg)++;
  const bool counts = pos == neg && pos == 140;

  double worst = 0.0;
  std::vector<std::size_t> minority;
  for (std::size_t i = 0; i < n; ++i)
    if (samples[i].label == Polarity::Negative) minority.push_back(i);
  Matrix mpts(minority.size(), dim);
  for (std::size_t r2 = 0; r2 < minority.size(); ++r2)
    for (std::size_t c = 0; c < dim; ++c) mpts(r2, c) = all(minority[r2], c);
  const auto mknn = brute_knn(mpts, k);
  bool neighbors_ok = true;
  for (std::size_t j = 0; j < r.origins.size(); ++j) {
    const auto& o = r.origins[j];
    const auto& x = r.samples[n + j].features;
    double e2 = 0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double e = (x[c] - all(o.base, c)) - o.delta * (all(o.neighbor, c) - all(o.base, c));
      e2 += e * e;
    }
    worst = std::max(worst, std::sqrt(e2));
    const auto b = static_cast<std::size_t>(std::find(minority.begin(), minority.end(), o.base) - minority.begin());
    const auto nb = static_cast<std::size_t>(std::find(minority.begin(), minority.end(), o.neighbor) - minority.begin());
    if (std::find(mknn[b].begin(), mknn[b].end(), nb) == mknn[b].end()) neighbors_ok = false;
  }
  const bool oracle = nearest_neighbors(all, k) == brute_knn(all, k) &&
                      nearest_neighbors(mpts, k) == mknn && neighbors_ok;

  const auto again = smote(samples, k, 404);
  bool same = again.samples.size() == r.samples.size();
  for (std::size_t i = 0; same && i < r.samples.size(); ++i)
    same = again.samples[i].features == r.samples[i].features;

  Outcome out;
  out.pass = counts && worst <= kSegmentTol && oracle && same;
  out.detail = "counts " + std::to_string(pos) + "/" + std::to_string(neg) + ", max segment error " +
               fmt("%.2g", worst) + ", k-NN oracle " + (oracle ? "equal" : "DIFFERENT") +
               ", rerun " + (same ? "identical" : "DIFFERENT");
  return out;
}

// 4 and 9 -------------------------------------------------------------------

struct PipelineRun {
  nlohmann::json metrics;
  double seconds = 0.0;
  fs::path out;
};

PipelineRun run_pipeline(const std::string& name) {
  auto cfg = PipelineConfig::load(kSynthetic / "config.json");
  cfg.out = scratch(name);
  const auto t0 = Clock::now();
  cmd_pipeline(cfg);
  PipelineRun r;
  r.seconds = seconds_since(t0);
  r.out = cfg.out;
  r.metrics = nlohmann::json::parse(read_file(cfg.out / artifacts::kMetrics));
  return r;
}

Outcome planted_pipeline(const PipelineRun& run) {
  const double f1 = run.metrics.at("f1").get<double>();
  Outcome o;
  o.pass = f1 >= kPipelineF1 && run.seconds < kPipelineSeconds;
  o.detail = "token F1 " + fmt("%.4f", f1) + " (precision " +
             fmt("%.4f", run.metrics.at("precision").get<double>()) + ", recall " +
             fmt("%.4f", run.metrics.at("recall").get<double>()) + ") on " +
             std::to_string(run.metrics.at("n_test").get<int>()) + " held-out reviews, " +
             fmt("%.1f s", run.seconds);
  return o;
}

Outcome determinism(const PipelineRun& a, const PipelineRun& b) {
  std::vector<std::string> differing;
  for (const char* f : {artifacts::kMetrics, artifacts::kModel, "dcnn.bin", artifacts::kRatingModel,
                        "rating_model.bin"})
    if (read_file(a.out / f) != read_file(b.out / f)) differing.push_back(f);
  Outcome o;
  o.pass = differing.empty();
  o.detail = o.pass ? "metrics.json, dcnn.json/.bin and rating_model.json/.bin byte-identical"
                    : "differing: " + differing.front();
  return o;
}

// 5 -------------------------------------------------------------------------

struct RatingData {
  std::vector<RatingTriple> train, test;
};

// 200 x 100 exactly rank-3 clean matrix, 10% of cells observed, Gaussian
// noise 0.1, clamped to [1, 5]. `value` maps (user, item) factors to the
// clean rating.
RatingData rating_data(std::uint64_t seed,
                       const std::function<double(const double*, const double*)>& value) {
  const std::size_t users = 200, items = 100;
  Lcg64 rng(seed);
  std::vector<double> uf(users * 2), itf(items * 2);
  for (auto& x : uf) x = rng.normal();
  for (auto& x : itf) x = rng.normal();
  std::vector<std::size_t> cells(users * items);
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = k;
  shuffle_in_place(cells, rng);
  cells.resize(cells.size() / 10);
  std::sort(cells.begin(), cells.end());
  std::vector<RatingTriple> all;
  char u[32], i[32];
  for (const auto cell : cells) {
    const std::size_t a = cell / items, b = cell % items;
    const double r = std::clamp(value(&uf[2 * a], &itf[2 * b]) + 0.1 * rng.normal(), 1.0, 5.0);
    std::snprintf(u, sizeof u, "u%03zu", a);
    std::snprintf(i, sizeof i, "i%03zu", b);
    all.push_back({u, i, r});
  }
  auto [train, test] = split(all, 0.8, seed + 1);
  return {std::move(train), std::move(test)};
}

struct RatingScores {
  double pipeline, mf, mean;
};

RatingScores score_ratings(const RatingData& d, std::uint64_t seed) {
  RatingModelOptions ro;
  ro.rank = 3;
  ro.seed = seed;
  const auto model = RatingModel::fit(d.train, ro);
  MfOptions mo;
  mo.seed = seed;
  const auto mf = MfModel::fit(d.train, mo);
  double mu = 0;
  for (const auto& t : d.train) mu += t.value;
  mu /= static_cast<double>(d.train.size());
  std::vector<EvalPair> p, m, g;
  for (const auto& t : d.test) {
    p.push_back({t.user, t.item, model.predict(t.user, t.item), t.value});
    m.push_back({t.user, t.item, mf.predict(t.user, t.item), t.value});
    g.push_back({t.user, t.item, mu, t.value});
  }
  return {rmse(p), rmse(m), rmse(g)};
}

Outcome rating_prediction() {
  // Rank 3 with factors P_u = (1, b_u, x_u), Q_i = (3 + c_i, 1, y_i): user
  // and item offsets plus one interaction, every random coordinate
  // N(0, 0.5^2).
  const auto biased = [](const double* p, const double* q) {
    return 3.0 + 0.5 * q[0] + 0.5 * p[0] + (0.5 * p[1]) * (0.5 * q[1]);
  };
  const auto data = rating_data(505, biased);
  const auto s = score_ratings(data, 17);
  Outcome o;
  o.pass = s.pipeline <= kRatingRmse && s.pipeline <= kRatingVsMean * s.mean &&
           s.pipeline <= kRatingVsMf * s.mf;
  o.detail = "held-out RMSE " + fmt("%.4f", s.pipeline) + " (limit 0.25), global mean " +
             fmt("%.4f", s.mean) + " (limit x0.5 = " + fmt("%.4f", kRatingVsMean * s.mean) +
             "), MF " + fmt("%.4f", s.mf) + " (limit x1.05 = " + fmt("%.4f", kRatingVsMf * s.mf) + ")";

  // Best held-out RMSE over the model's own knobs, for the record only.
  double best = 1e9;
  std::string at;
  for (std::size_t f : {1, 2, 3, 4, 5, 8})
    for (std::size_t knn : {5, 10, 30, 60, 200}) {
      RatingModelOptions ro;
      ro.rank = f;
      ro.neighbors = knn;
      ro.seed = 17;
      const auto m = RatingModel::fit(data.train, ro);
      std::vector<EvalPair> p;
      for (const auto& t : data.test) p.push_back({t.user, t.item, m.predict(t.user, t.item), t.value});
      if (rmse(p) < best) {
        best = rmse(p);
        at = "f=" + std::to_string(f) + ", k_nn=" + std::to_string(knn);
      }
    }
  info("criterion 5, best pipeline RMSE over f and k_nn: " + fmt("%.4f", best) + " (" + at + ")");

  // Isotropic rank 3: P_u = (1, a1, a2), Q_i = (3, b1, b2), factors N(0, 0.8^2).
  const auto iso = [](const double* p, const double* q) {
    return 3.0 + 0.64 * (p[0] * q[0] + p[1] * q[1]);
  };
  const auto si = score_ratings(rating_data(606, iso), 17);
  info("criterion 5, isotropic rank-3 variant: pipeline RMSE " + fmt("%.4f", si.pipeline) +
       ", MF " + fmt("%.4f", si.mf) + ", global mean " + fmt("%.4f", si.mean));
  return o;
}

// 6 -------------------------------------------------------------------------

Outcome metric_oracles() {
  Lcg64 rng(707);
  double worst = 0.0;
  bool ordered = true, counts_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<EvalPair> pairs;
    std::vector<BioTag> pt, gt;
    std::vector<Polarity> pl, gl;
    for (std::size_t k = 0; k < n; ++k) {
      pairs.push_back({"u", "i", rng.uniform(1, 5), 1.0 + static_cast<double>(rng.below(5))});
      pt.push_back(static_cast<BioTag>(rng.below(3)));
      gt.push_back(static_cast<BioTag>(rng.below(3)));
      pl.push_back(rng.below(2) ? Polarity::Positive : Polarity::Negative);
      gl.push_back(rng.below(2) ? Polarity::Positive : Polarity::Negative);
    }
    // Oracle: long double accumulation, set-based tag counting.
    long double abs_sum = 0, sq_sum = 0;
    for (const auto& p : pairs) {
      const long double e = static_cast<long double>(p.predicted) - p.actual;
      abs_sum += std::fabs(e);
      sq_sum += e * e;
    }
    const double o_mae = static_cast<double>(abs_sum / n);
    const double o_rmse = static_cast<double>(std::sqrt(sq_sum / n));
    std::set<std::size_t> pred_pos, gold_pos;
    for (std::size_t k = 0; k < n; ++k) {
      if (pt[k] != BioTag::O) pred_pos.insert(k);
      if (gt[k] != BioTag::O) gold_pos.insert(k);
    }
    std::size_t tp = 0;
    for (auto k : pred_pos) tp += gold_pos.count(k);
    const double pr = pred_pos.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(pred_pos.size());
    const double rc = gold_pos.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(gold_pos.size());
    const double f1 = pr + rc == 0.0 ? 0.0 : 2 * pr * rc / (pr + rc);
    std::size_t same = 0;
    for (std::size_t k = 0; k < n; ++k) same += pl[k] == gl[k] ? 1 : 0;
    const double acc = static_cast<double>(same) / static_cast<double>(n);

    const double got_mae = mae(pairs), got_rmse = rmse(pairs);
    const auto ts = tag_f1(pt, gt);
    const double got_acc = sentiment_accuracy(pl, gl);
    for (double d : {got_mae - o_mae, got_rmse - o_rmse, ts.precision - pr, ts.recall - rc,
                     ts.f1 - f1, got_acc - acc})
      worst = std::max(worst, std::abs(d));
    if (got_rmse < got_mae) ordered = false;
    if (ts.counts.tp != tp || ts.counts.fp != pred_pos.size() - tp ||
        ts.counts.fn != gold_pos.size() - tp || ts.counts.tp + ts.counts.fp + ts.counts.fn + ts.counts.tn != n)
      counts_ok = false;
  }
  Outcome o;
  o.pass = worst <= kMetricTol && ordered && counts_ok;
  o.detail = "100 cases, max deviation " + fmt("%.2g", worst) + ", rmse >= mae " +
             (ordered ? "on all" : "VIOLATED") + ", confusion counts " + (counts_ok ? "exact" : "WRONG");
  return o;
}

// 7 -------------------------------------------------------------------------

Outcome svd_oracle() {
  struct Case {
    std::size_t rows, cols, rank, f;
  };
  const std::vector<Case> cases = {{200, 200, 1, 1},  {200, 200, 20, 20}, {200, 150, 3, 20},
                                   {150, 200, 7, 10}, {100, 80, 3, 3},    {60, 200, 12, 15},
                                   {200, 40, 5, 8},   {30, 25, 2, 20},    {120, 120, 10, 10},
                                   {200, 100, 15, 18}};
  double worst_rec = 0.0, worst_sigma = 0.0;
  std::uint64_t seed = 808;
  for (const auto& c : cases) {
    Lcg64 rng(seed++);
    Matrix a(c.rows, c.rank), b(c.cols, c.rank);
    for (auto& x : a.flat()) x = rng.normal();
    for (auto& x : b.flat()) x = rng.normal();
    SparseMatrix sp{c.rows, c.cols, {}};
    Eigen::MatrixXd dense(c.rows, c.cols);
    double norm = 0;
    for (std::size_t r = 0; r < c.rows; ++r)
      for (std::size_t k = 0; k < c.cols; ++k) {
        const double v = dot(a.row(r), b.row(k));
        sp.entries.push_back({r, k, v});
        dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
        norm += v * v;
      }
    const auto s = truncated_svd(sp, {c.f, 5, 8, seed, false});
    double err = 0;
    for (std::size_t r = 0; r < c.rows; ++r)
      for (std::size_t k = 0; k < c.cols; ++k) {
        const double d = dot(s.user_factors.row(r), s.item_factors.row(k)) -
                         dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k));
        err += d * d;
      }
    worst_rec = std::max(worst_rec, std::sqrt(err / norm));
    const Eigen::JacobiSVD<Eigen::MatrixXd> ref(dense);
    for (std::size_t k = 0; k < c.f; ++k)
      worst_sigma = std::max(worst_sigma, std::abs(s.singular_values[k] -
                                                   ref.singularValues()(static_cast<Eigen::Index>(k))));
  }
  Outcome o;
  o.pass = worst_rec <= kSvdTol && worst_sigma <= kSvdTol;
  o.detail = std::to_string(cases.size()) + " matrices up to 200x200, max relative reconstruction error " +
             fmt("%.2g", worst_rec) + ", max singular value deviation " + fmt("%.2g", worst_sigma);
  return o;
}

// 8 -------------------------------------------------------------------------

Outcome cp_weights_check() {
  const std::vector<double> u = {1.0, 0.4, 2.2, 0.9, 1.5}, v = {0.7, 1.3, 2.0, 0.5};
  const std::vector<double> w = {2.0, 1.0};
  auto tensor = [&](double scale) {
    AspectTensor t;
    for (std::size_t a = 0; a < u.size(); ++a) t.users.push_back("u" + std::to_string(a));
    for (std::size_t b = 0; b < v.size(); ++b) t.items.push_back("i" + std::to_string(b));
    t.clusters = w.size();
    for (std::size_t a = 0; a < u.size(); ++a)
      for (std::size_t b = 0; b < v.size(); ++b)
        for (std::size_t c = 0; c < w.size(); ++c) t.entries.push_back({a, b, c, scale * u[a] * v[b] * w[c]});
    return t;
  };
  const CpOptions opts;
  const auto base = cp_weights(tensor(1.0), opts);
  double dev = std::max(std::abs(base.weights[0] - 0.8), std::abs(base.weights[1] - 0.2));
  double scale_dev = 0;
  for (double s : {0.01, 3.0, 250.0}) {
    const auto r = cp_weights(tensor(s), opts);
    for (std::size_t k = 0; k < 2; ++k) scale_dev = std::max(scale_dev, std::abs(r.weights[k] - base.weights[k]));
  }
  Outcome o;
  o.pass = dev <= kCpTol && scale_dev <= kCpScaleTol;
  o.detail = "weights (" + fmt("%.6f", base.weights[0]) + ", " + fmt("%.6f", base.weights[1]) +
             "), scaling deviation " + fmt("%.2g", scale_dev);
  return o;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "gradient fidelity", gradient_fidelity);
  report(2, "overfit sanity", overfit_sanity);
  report(3, "SMOTE correctness", smote_correctness);

  PipelineRun first, second;
  report(4, "planted-aspect end-to-end", [&] {
    first = run_pipeline("run1");
    return planted_pipeline(first);
  });
  report(5, "rating prediction", rating_prediction);
  report(6, "metric oracles", metric_oracles);
  report(7, "SVD oracle", svd_oracle);
  report(8, "CP weights", cp_weights_check);
  report(9, "determinism", [&] {
    if (first.out.empty()) first = run_pipeline("run1");
    second = run_pipeline("run2");
    return determinism(first, second);
  });

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
