#include "dcrec/dcnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dcrec/error.hpp"
#include "dcrec/kernels.hpp"
#include "dcrec/rng.hpp"

namespace dcrec {

namespace {

constexpr double kProbFloor = 1e-12;

std::size_t conv_offset(const ConvBlock& b) {
  return b.padding == Padding::Same ? (b.width - 1) / 2 : 0;
}

std::size_t conv_out_len(std::size_t len, const ConvBlock& b) {
  return b.padding == Padding::Same ? len : len - b.width + 1;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& x : row) {
      x = std::exp(x - mx);
      sum += x;
    }
    for (auto& x : row) x /= sum;
  }
}

void glorot(Matrix& m, std::size_t fan_in, std::size_t fan_out, Lcg64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& x : m.flat()) x = rng.uniform(-limit, limit);
}

void check_input(const DcnnConfig& cfg, const DcnnInput& in) {
  const std::size_t len = std::max(in.word.rows(), in.pos.rows());
  if (len == 0) throw ShapeError("forward: empty input");
  if (in.length > len) throw ShapeError("forward: length exceeds padded sequence");
  if (cfg.word_filters > 0 && (in.word.rows() != len || in.word.cols() != cfg.word_dim))
    throw ShapeError("forward: word channel must be L x word_dim");
  if (cfg.pos_filters > 0 && (in.pos.rows() != len || in.pos.cols() != cfg.pos_dim))
    throw ShapeError("forward: POS channel must be L x pos_dim");
}

}  // namespace

// ---------------------------------------------------------------------------

ConvBlock::ConvBlock(std::size_t filters, std::size_t w, std::size_t channels, Padding pad)
    : width(w), padding(pad), kernels(filters, w * channels), bias(filters, 0.0) {
  if (w == 0) throw DomainError("ConvBlock: width must be positive");
}

Matrix conv1d_linear(const Matrix& input, const ConvBlock& block) {
  if (input.rows() == 0) throw ShapeError("conv1d: empty input");
  if (input.cols() != block.channels())
    throw ShapeError("conv1d: input has " + std::to_string(input.cols()) +
                     " channels, block expects " + std::to_string(block.channels()));
  if (block.padding == Padding::Valid && input.rows() < block.width)
    throw ShapeError("conv1d: input shorter than kernel with valid padding");
  return kernels::conv1d(input, block.kernels, block.bias, block.width, conv_offset(block),
                         conv_out_len(input.rows(), block));
}

Matrix conv1d_forward(const Matrix& input, const ConvBlock& block) {
  Matrix out = conv1d_linear(input, block);
  for (auto& x : out.flat()) x = std::max(x, 0.0);
  return out;
}

PoolResult global_max_pool(const Matrix& features) {
  if (features.rows() == 0) throw ShapeError("global_max_pool: no rows");
  PoolResult p;
  p.values.assign(features.row(0).begin(), features.row(0).end());
  p.argmax.assign(features.cols(), 0);
  for (std::size_t t = 1; t < features.rows(); ++t)
    for (std::size_t f = 0; f < features.cols(); ++f)
      if (features(t, f) > p.values[f]) {
        p.values[f] = features(t, f);
        p.argmax[f] = t;
      }
  return p;
}

// ---------------------------------------------------------------------------

DcnnParams DcnnParams::zeros(const DcnnConfig& cfg) {
  DcnnParams p;
  for (auto w : cfg.widths) {
    if (cfg.word_filters > 0) p.word_convs.emplace_back(cfg.word_filters, w, cfg.word_dim);
    if (cfg.pos_filters > 0) p.pos_convs.emplace_back(cfg.pos_filters, w, cfg.pos_dim);
  }
  const std::size_t h = cfg.feature_width();
  p.tag_weights = Matrix(kBioClasses, h);
  p.tag_bias.assign(kBioClasses, 0.0);
  p.sent_weights.assign(h, 0.0);
  p.sent_bias.assign(1, 0.0);
  return p;
}

void DcnnParams::visit(const std::function<void(const std::string&, std::span<double>)>& fn) {
  auto conv = [&](const char* channel, std::vector<ConvBlock>& blocks) {
    for (auto& b : blocks) {
      const std::string base = std::string(channel) + ".w" + std::to_string(b.width);
      fn(base + ".kernels", b.kernels.flat());
      fn(base + ".bias", b.bias);
    }
  };
  conv("word", word_convs);
  conv("pos", pos_convs);
  if (!tag_weights.empty()) fn("tag.weights", tag_weights.flat());
  if (!tag_bias.empty()) fn("tag.bias", tag_bias);
  if (!sent_weights.empty()) fn("sentiment.weights", sent_weights);
  if (!sent_bias.empty()) fn("sentiment.bias", sent_bias);
}

void DcnnParams::visit(
    const std::function<void(const std::string&, std::span<const double>)>& fn) const {
  const_cast<DcnnParams*>(this)->visit(
      [&](const std::string& n, std::span<double> v) { fn(n, v); });
}

std::size_t DcnnParams::count() const {
  std::size_t n = 0;
  visit([&](const std::string&, std::span<const double> v) { n += v.size(); });
  return n;
}

namespace {
std::vector<std::span<double>> views(DcnnParams& p) {
  std::vector<std::span<double>> out;
  p.visit([&](const std::string&, std::span<double> v) { out.push_back(v); });
  return out;
}
}  // namespace

void DcnnParams::add_scaled(const DcnnParams& other, double scale) {
  auto mine = views(*this);
  auto theirs = views(const_cast<DcnnParams&>(other));
  if (mine.size() != theirs.size()) throw ShapeError("DcnnParams: layout mismatch");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i].size() != theirs[i].size()) throw ShapeError("DcnnParams: layout mismatch");
    for (std::size_t j = 0; j < mine[i].size(); ++j) mine[i][j] += scale * theirs[i][j];
  }
}

void DcnnParams::set_zero() {
  visit([](const std::string&, std::span<double> v) { std::fill(v.begin(), v.end(), 0.0); });
}

DcnnModel::DcnnModel(DcnnConfig config, std::uint64_t seed)
    : config_(std::move(config)), params_(DcnnParams::zeros(config_)) {
  Lcg64 rng(seed);
  for (auto& b : params_.word_convs)
    glorot(b.kernels, b.width * b.channels(), b.width * b.filters(), rng);
  for (auto& b : params_.pos_convs)
    glorot(b.kernels, b.width * b.channels(), b.width * b.filters(), rng);
  const std::size_t h = config_.feature_width();
  glorot(params_.tag_weights, h, kBioClasses, rng);
  const double limit = std::sqrt(6.0 / static_cast<double>(h + 1));
  for (auto& x : params_.sent_weights) x = rng.uniform(-limit, limit);
}

DcnnModel DcnnModel::zeros(DcnnConfig config) {
  DcnnModel m;
  m.config_ = std::move(config);
  m.params_ = DcnnParams::zeros(m.config_);
  return m;
}

// ---------------------------------------------------------------------------

ForwardResult forward(const DcnnModel& model, const DcnnInput& input, bool train_mode,
                      std::uint64_t seed) {
  const auto& cfg = model.config();
  const auto& p = model.params();
  check_input(cfg, input);
  const std::size_t len = std::max(input.word.rows(), input.pos.rows());
  const std::size_t h = cfg.feature_width();

  ForwardResult r;
  auto& c = r.cache;
  c.model_version = model.version();
  c.input = &input;
  c.features = Matrix(len, h);

  std::size_t col = 0;
  auto run = [&](const std::vector<ConvBlock>& blocks, const Matrix& in, std::vector<Matrix>& pre) {
    for (const auto& b : blocks) {
      if (b.padding != Padding::Same) throw ShapeError("forward: tagging path needs same padding");
      pre.push_back(conv1d_linear(in, b));
      const Matrix& z = pre.back();
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t f = 0; f < b.filters(); ++f) c.features(t, col + f) = std::max(z(t, f), 0.0);
      col += b.filters();
    }
  };
  run(p.word_convs, input.word, c.word_pre);
  run(p.pos_convs, input.pos, c.pos_pre);

  if (train_mode && cfg.dropout > 0.0) {
    if (cfg.dropout >= 1.0) throw DomainError("dropout rate must be below 1");
    const double keep_scale = 1.0 / (1.0 - cfg.dropout);
    c.dropout_scale = Matrix(len, h);
    c.dropped = Matrix(len, h);
    Lcg64 rng(seed);
    for (std::size_t i = 0; i < c.features.size(); ++i) {
      const double s = rng.uniform() >= cfg.dropout ? keep_scale : 0.0;
      c.dropout_scale.flat()[i] = s;
      c.dropped.flat()[i] = s * c.features.flat()[i];
    }
  } else {
    c.dropped = c.features;
  }

  r.tag_probs = kernels::matmul_nt(c.dropped, p.tag_weights);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t k = 0; k < kBioClasses; ++k) r.tag_probs(t, k) += p.tag_bias[k];
  softmax_rows(r.tag_probs);

  c.pooled = global_max_pool(c.features);
  const double logit = dot(p.sent_weights, c.pooled.values) + p.sent_bias[0];
  r.sentiment_prob = sigmoid(logit);
  return r;
}

LossBreakdown loss(const Matrix& tag_probs, std::span<const BioTag> gold_tags,
                   double sentiment_prob, std::optional<Polarity> gold_label, double lambda) {
  if (lambda < 0.0) throw DomainError("loss: lambda must be >= 0");
  if (gold_tags.size() > tag_probs.rows()) throw ShapeError("loss: more gold tags than tokens");
  LossBreakdown l;
  if (!gold_tags.empty()) {
    for (std::size_t t = 0; t < gold_tags.size(); ++t)
      l.tag -= std::log(std::max(tag_probs(t, static_cast<std::size_t>(gold_tags[t])), kProbFloor));
    l.tag /= static_cast<double>(gold_tags.size());
  }
  if (gold_label) {
    const double q = *gold_label == Polarity::Positive ? sentiment_prob : 1.0 - sentiment_prob;
    l.sentiment = -std::log(std::max(q, kProbFloor));
  }
  l.total = l.tag + lambda * l.sentiment;
  return l;
}

DcnnParams backward(const DcnnModel& model, const ForwardResult& fwd,
                    std::span<const BioTag> gold_tags, std::optional<Polarity> gold_label,
                    double lambda) {
  const auto& c = fwd.cache;
  if (c.model_version != model.version() || c.input == nullptr)
    throw DomainError("backward: stale forward cache (model changed since forward)");
  const auto& p = model.params();
  const auto& cfg = model.config();
  const std::size_t len = c.features.rows();
  if (gold_tags.size() > len) throw ShapeError("backward: more gold tags than tokens");

  DcnnParams g = DcnnParams::zeros(cfg);

  // Tag head: d(mean CE)/d(logits) = (p - onehot) / n.
  Matrix dz(len, kBioClasses);
  if (!gold_tags.empty()) {
    const double inv_n = 1.0 / static_cast<double>(gold_tags.size());
    for (std::size_t t = 0; t < gold_tags.size(); ++t) {
      const auto gold = static_cast<std::size_t>(gold_tags[t]);
      if (fwd.tag_probs(t, gold) < kProbFloor) continue;  // clamped: flat
      for (std::size_t k = 0; k < kBioClasses; ++k)
        dz(t, k) = (fwd.tag_probs(t, k) - (k == gold ? 1.0 : 0.0)) * inv_n;
    }
  }
  g.tag_weights = kernels::matmul_tn(dz, c.dropped);
  for (std::size_t t = 0; t < len; ++t)
    for (std::size_t k = 0; k < kBioClasses; ++k) g.tag_bias[k] += dz(t, k);

  Matrix dfeat = kernels::matmul(dz, p.tag_weights);
  if (!c.dropout_scale.empty())
    for (std::size_t i = 0; i < dfeat.size(); ++i) dfeat.flat()[i] *= c.dropout_scale.flat()[i];

  // Sentiment head.
  if (gold_label) {
    const double y = *gold_label == Polarity::Positive ? 1.0 : 0.0;
    const double q = fwd.sentiment_prob;
    const bool clamped = (y == 1.0 && q < kProbFloor) || (y == 0.0 && 1.0 - q < kProbFloor);
    const double ds = clamped ? 0.0 : lambda * (q - y);
    for (std::size_t f = 0; f < g.sent_weights.size(); ++f) {
      g.sent_weights[f] = ds * c.pooled.values[f];
      dfeat(c.pooled.argmax[f], f) += ds * p.sent_weights[f];
    }
    g.sent_bias[0] = ds;
  }

  // ReLU and convolutions.
  std::size_t col = 0;
  auto back = [&](const std::vector<ConvBlock>& blocks, const std::vector<Matrix>& pre,
                  const Matrix& in, std::vector<ConvBlock>& grads) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::size_t nf = blocks[b].filters();
      Matrix dpre(len, nf);
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t f = 0; f < nf; ++f)
          dpre(t, f) = pre[b](t, f) > 0.0 ? dfeat(t, col + f) : 0.0;
      kernels::conv1d_backward_params(in, dpre, blocks[b].width, conv_offset(blocks[b]),
                                      grads[b].kernels, grads[b].bias);
      col += nf;
    }
  };
  back(p.word_convs, c.word_pre, c.input->word, g.word_convs);
  back(p.pos_convs, c.pos_pre, c.input->pos, g.pos_convs);
  return g;
}

// ---------------------------------------------------------------------------

TrainReport train(DcnnModel& model, std::span<const DcnnSample> data, const TrainOptions& opts) {
  if (data.empty()) throw DomainError("train: empty dataset");
  if (opts.batch_size == 0) throw DomainError("train: batch_size must be positive");
  TrainReport report;

  DcnnParams m = DcnnParams::zeros(model.config());
  DcnnParams v = DcnnParams::zeros(model.config());
  const std::size_t batch = std::min(opts.batch_size, data.size());
  std::vector<DcnnParams> grads(batch, DcnnParams::zeros(model.config()));
  std::vector<double> losses(batch, 0.0);
  DcnnParams total = DcnnParams::zeros(model.config());

  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    const std::uint64_t shuffle_coords[] = {0, epoch};
    Lcg64 shuffle_rng(mix_seed(opts.seed, shuffle_coords));
    shuffle_in_place(order, shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < data.size(); start += batch) {
      const std::size_t n = std::min(batch, data.size() - start);
      const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t j = 0; j < nn; ++j) {
        const auto& s = data[order[start + static_cast<std::size_t>(j)]];
        const std::uint64_t coords[] = {1, epoch, start + static_cast<std::size_t>(j)};
        const auto fwd = forward(model, s.input, true, mix_seed(opts.seed, coords));
        losses[j] = loss(fwd.tag_probs, s.tags, fwd.sentiment_prob, s.label, opts.lambda).total;
        grads[j] = backward(model, fwd, s.tags, s.label, opts.lambda);
      }
      total.set_zero();
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(losses[j])) {
          std::ostringstream msg;
          msg << "train: non-finite loss at epoch " << epoch << ", sample "
              << order[start + j] << " (batch starting at " << start << ")";
          throw NumericError(msg.str());
        }
        epoch_loss += losses[j];
        total.add_scaled(grads[j], 1.0 / static_cast<double>(n));
      }

      ++report.steps;
      const double t = static_cast<double>(report.steps);
      const double c1 = 1.0 - std::pow(opts.beta1, t);
      const double c2 = 1.0 - std::pow(opts.beta2, t);
      auto pv = views(model.mutable_params());
      auto gv = views(total);
      auto mv = views(m);
      auto vv = views(v);
      for (std::size_t i = 0; i < pv.size(); ++i) {
        for (std::size_t k = 0; k < pv[i].size(); ++k) {
          const double gk = gv[i][k];
          mv[i][k] = opts.beta1 * mv[i][k] + (1.0 - opts.beta1) * gk;
          vv[i][k] = opts.beta2 * vv[i][k] + (1.0 - opts.beta2) * gk * gk;
          const double mhat = mv[i][k] / c1;
          const double vhat = vv[i][k] / c2;
          pv[i][k] -= opts.learning_rate * mhat / (std::sqrt(vhat) + opts.epsilon);
        }
      }
    }
    epoch_loss /= static_cast<double>(data.size());
    report.epoch_loss.push_back(epoch_loss);
    if (opts.on_epoch && !opts.on_epoch(epoch, epoch_loss)) break;
  }
  return report;
}

DcnnPrediction predict(const DcnnModel& model, const DcnnInput& input) {
  const auto fwd = forward(model, input, false, 0);
  DcnnPrediction out;
  out.sentiment_prob = fwd.sentiment_prob;
  out.tags.reserve(input.length);
  for (std::size_t t = 0; t < input.length; ++t) {
    const auto row = fwd.tag_probs.row(t);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    out.tags.push_back(static_cast<BioTag>(best));
  }
  return out;
}

// ---------------------------------------------------------------------------

GradientCheckReport gradient_check(const DcnnModel& model, const DcnnSample& sample,
                                   double epsilon, double tolerance,
                                   const GradientCheckOptions& opts) {
  GradientCheckReport report;
  const std::size_t total = model.params().count();
  if (total == 0) return report;

  const auto fwd = forward(model, sample.input, false, 0);
  DcnnParams analytic = backward(model, fwd, sample.tags, sample.label, opts.lambda);
  if (opts.tamper) opts.tamper(analytic);

  struct Entry {
    std::string name;
    std::size_t tensor;
    std::size_t index;
  };
  std::vector<std::string> names;
  std::vector<std::size_t> sizes;
  model.params().visit([&](const std::string& n, std::span<const double> v) {
    names.push_back(n);
    sizes.push_back(v.size());
  });
  std::vector<Entry> entries;
  for (std::size_t t = 0; t < names.size(); ++t)
    for (std::size_t i = 0; i < sizes[t]; ++i) entries.push_back({names[t], t, i});
  if (entries.size() > opts.max_checked) {
    Lcg64 rng(opts.seed);
    shuffle_in_place(entries, rng);
    entries.resize(opts.max_checked);
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.tensor < b.tensor || (a.tensor == b.tensor && a.index < b.index);
    });
  }

  DcnnModel probe = model;
  auto eval = [&](DcnnModel& m) {
    const auto f = forward(m, sample.input, false, 0);
    return loss(f.tag_probs, sample.tags, f.sentiment_prob, sample.label, opts.lambda).total;
  };
  const auto agrad = views(analytic);
  for (const auto& e : entries) {
    auto pv = views(probe.mutable_params());
    double& x = pv[e.tensor][e.index];
    const double saved = x;
    x = saved + epsilon;
    const double up = eval(probe);
    x = saved - epsilon;
    const double down = eval(probe);
    x = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double a = agrad[e.tensor][e.index];
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    const std::string label = e.name + "[" + std::to_string(e.index) + "]";
    if (report.worst_parameter.empty() || rel > report.max_relative_error) {
      report.max_relative_error = rel;
      report.worst_parameter = label;
    }
    if (rel > tolerance) report.offending.push_back(label);
    ++report.checked;
  }
  return report;
}

}  // namespace dcrec
