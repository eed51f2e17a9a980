#include "dcrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>

#include "dcrec/error.hpp"
#include "dcrec/kernels.hpp"
#include "dcrec/linalg.hpp"
#include "dcrec/model_io.hpp"
#include "dcrec/rng.hpp"

namespace dcrec {

using json = nlohmann::json;

ImputedMatrix::ImputedMatrix(const SparseMatrix& m, bool center)
    : rows_(m.rows), cols_(m.cols) {
  if (m.entries.empty()) throw DomainError("rating matrix has no observed entries");
  std::vector<double> rsum(rows_, 0.0), csum(cols_, 0.0);
  std::vector<std::size_t> rcnt(rows_, 0), ccnt(cols_, 0);
  double total = 0.0;
  for (const auto& e : m.entries) {
    if (e.row >= rows_ || e.col >= cols_) throw DomainError("sparse entry out of range");
    if (!std::isfinite(e.value)) throw DomainError("sparse entry is not finite");
    rsum[e.row] += e.value;
    csum[e.col] += e.value;
    ++rcnt[e.row];
    ++ccnt[e.col];
    total += e.value;
  }
  mean_ = total / static_cast<double>(m.entries.size());
  row_mean_.resize(rows_);
  col_mean_.resize(cols_);
  row_shift_.resize(rows_);
  col_shift_.resize(cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    row_mean_[r] = rcnt[r] ? rsum[r] / static_cast<double>(rcnt[r]) : mean_;
    row_shift_[r] = center ? 0.0 : row_mean_[r];
  }
  for (std::size_t c = 0; c < cols_; ++c) {
    col_mean_[c] = ccnt[c] ? csum[c] / static_cast<double>(ccnt[c]) : mean_;
    col_shift_[c] = col_mean_[c] - mean_;
  }

  // Residual against the imputation pattern, bucketed by row and by column.
  row_ptr_.assign(rows_ + 1, 0);
  col_ptr_.assign(cols_ + 1, 0);
  for (const auto& e : m.entries) {
    ++row_ptr_[e.row + 1];
    ++col_ptr_[e.col + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
  row_col_.resize(m.entries.size());
  row_val_.resize(m.entries.size());
  col_row_.resize(m.entries.size());
  col_val_.resize(m.entries.size());
  auto rnext = row_ptr_;
  auto cnext = col_ptr_;
  std::vector<SparseEntry> sorted = m.entries;
  std::sort(sorted.begin(), sorted.end(), [](const SparseEntry& a, const SparseEntry& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
  });
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
    if (sorted[k].row == sorted[k + 1].row && sorted[k].col == sorted[k + 1].col)
      throw DomainError("sparse matrix has duplicate entries");
  for (const auto& e : sorted) {
    const double centered = e.value - (center ? row_mean_[e.row] : 0.0);
    const double s = centered - row_shift_[e.row] - col_shift_[e.col];
    row_col_[rnext[e.row]] = e.col;
    row_val_[rnext[e.row]++] = s;
    col_row_[cnext[e.col]] = e.row;
    col_val_[cnext[e.col]++] = s;
  }
}

Matrix ImputedMatrix::times(const Matrix& x) const {
  if (x.rows() != cols_) throw ShapeError("ImputedMatrix::times: shape mismatch");
  const std::size_t k = x.cols();
  std::vector<double> colsum(k, 0.0), bx(k, 0.0);
  for (std::size_t c = 0; c < cols_; ++c)
    for (std::size_t j = 0; j < k; ++j) {
      colsum[j] += x(c, j);
      bx[j] += col_shift_[c] * x(c, j);
    }
  Matrix out(rows_, k);
  const auto n = static_cast<std::ptrdiff_t>(rows_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < n; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    auto o = out.row(r);
    for (std::size_t j = 0; j < k; ++j) o[j] = row_shift_[r] * colsum[j] + bx[j];
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto xr = x.row(row_col_[p]);
      for (std::size_t j = 0; j < k; ++j) o[j] += row_val_[p] * xr[j];
    }
  }
  return out;
}

Matrix ImputedMatrix::transpose_times(const Matrix& y) const {
  if (y.rows() != rows_) throw ShapeError("ImputedMatrix::transpose_times: shape mismatch");
  const std::size_t k = y.cols();
  std::vector<double> rowsum(k, 0.0), ay(k, 0.0);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t j = 0; j < k; ++j) {
      rowsum[j] += y(r, j);
      ay[j] += row_shift_[r] * y(r, j);
    }
  Matrix out(cols_, k);
  const auto n = static_cast<std::ptrdiff_t>(cols_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t cc = 0; cc < n; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    auto o = out.row(c);
    for (std::size_t j = 0; j < k; ++j) o[j] = ay[j] + col_shift_[c] * rowsum[j];
    for (std::size_t p = col_ptr_[c]; p < col_ptr_[c + 1]; ++p) {
      const auto yr = y.row(col_row_[p]);
      for (std::size_t j = 0; j < k; ++j) o[j] += col_val_[p] * yr[j];
    }
  }
  return out;
}

Matrix ImputedMatrix::dense() const {
  Matrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) d(r, c) = row_shift_[r] + col_shift_[c];
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, row_col_[p]) += row_val_[p];
  }
  return d;
}

// ---------------------------------------------------------------------------

TruncatedSvd truncated_svd(const SparseMatrix& m, const SvdOptions& opts) {
  if (opts.rank < 1) throw DomainError("truncated_svd: rank must be >= 1");
  const ImputedMatrix a(m, opts.center);
  const std::size_t small = std::min(m.rows, m.cols);
  std::size_t f = opts.rank;
  if (f > small) {
    std::clog << "warning: svd rank " << f << " clamped to " << small << '\n';
    f = small;
  }
  const std::size_t l = std::min(f + opts.oversample, small);

  Lcg64 rng(opts.seed);
  Matrix omega(m.cols, l);
  for (auto& x : omega.flat()) x = rng.normal();

  Matrix q = linalg::thin_q(a.times(omega));
  for (std::size_t it = 0; it < std::max<std::size_t>(opts.power_iters, kMinPowerIters); ++it) {
    const Matrix z = linalg::thin_q(a.transpose_times(q));
    q = linalg::thin_q(a.times(z));
  }
  // B^T = M^T Q is cols x l; its SVD B^T = W S Vb^T gives M ~ (Q Vb) S W^T.
  const auto svd = linalg::jacobi_svd(a.transpose_times(q));
  const Matrix u_full = kernels::matmul(q, svd.v);

  TruncatedSvd out;
  out.singular_values.assign(svd.sigma.begin(), svd.sigma.begin() + static_cast<std::ptrdiff_t>(f));
  out.left = Matrix(m.rows, f);
  out.right = Matrix(m.cols, f);
  out.user_factors = Matrix(m.rows, f);
  out.item_factors = Matrix(m.cols, f);
  for (std::size_t j = 0; j < f; ++j) {
    const double root = std::sqrt(out.singular_values[j]);
    for (std::size_t r = 0; r < m.rows; ++r) {
      out.left(r, j) = u_full(r, j);
      out.user_factors(r, j) = u_full(r, j) * root;
    }
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.right(c, j) = svd.u(c, j);
      out.item_factors(c, j) = svd.u(c, j) * root;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
double clamp_rating(double r) { return std::clamp(r, 1.0, 5.0); }
}  // namespace

void RatingModel::index() {
  user_idx_.clear();
  item_idx_.clear();
  for (std::size_t u = 0; u < users_.size(); ++u) user_idx_.emplace(users_[u], u);
  for (std::size_t i = 0; i < items_.size(); ++i) item_idx_.emplace(items_[i], i);
  p_norm_.resize(p_.rows());
  for (std::size_t u = 0; u < p_.rows(); ++u) p_norm_[u] = norm2(p_.row(u));
}

RatingModel RatingModel::fit(std::span<const RatingTriple> ratings,
                             const RatingModelOptions& opts) {
  if (ratings.empty()) throw DomainError("RatingModel::fit: no ratings");
  RatingModel model;
  model.neighbors_ = opts.neighbors;

  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> cells;
  std::set<std::string> users, items;
  for (const auto& r : ratings) {
    if (!std::isfinite(r.value)) throw DomainError("RatingModel::fit: non-finite rating");
    auto& [sum, n] = cells[{r.user, r.item}];
    sum += r.value;
    ++n;
    users.insert(r.user);
    items.insert(r.item);
  }
  model.users_.assign(users.begin(), users.end());
  model.items_.assign(items.begin(), items.end());
  model.index();

  SparseMatrix m{model.users_.size(), model.items_.size(), {}};
  m.entries.reserve(cells.size());
  model.raters_.assign(model.items_.size(), {});
  for (const auto& [key, sn] : cells) {
    const auto u = model.user_idx_.at(key.first);
    const auto i = model.item_idx_.at(key.second);
    const double v = sn.first / static_cast<double>(sn.second);
    m.entries.push_back({u, i, v});
    model.raters_[i].emplace_back(u, v);
  }
  for (auto& r : model.raters_) std::sort(r.begin(), r.end());

  const ImputedMatrix means(m, true);
  model.global_mean_ = means.global_mean();
  model.user_mean_ = means.row_means();
  model.item_bias_ = means.col_means();
  for (auto& b : model.item_bias_) b -= model.global_mean_;

  const auto svd = truncated_svd(
      m, {opts.rank, opts.power_iters, opts.oversample, opts.seed, /*center=*/true});
  model.p_ = svd.user_factors;
  model.q_ = svd.item_factors;
  model.sigma_ = svd.singular_values;
  model.index();
  return model;
}

double RatingModel::similarity_index(std::size_t u, std::size_t v) const {
  if (p_norm_[u] == 0.0 || p_norm_[v] == 0.0) return 0.0;
  return dot(p_.row(u), p_.row(v)) / (p_norm_[u] * p_norm_[v]);
}

double RatingModel::user_similarity(std::string_view u, std::string_view v) const {
  const auto iu = user_idx_.find(std::string(u));
  const auto iv = user_idx_.find(std::string(v));
  if (iu == user_idx_.end() || iv == user_idx_.end())
    throw DomainError("user_similarity: unknown user");
  return similarity_index(iu->second, iv->second);
}

double RatingModel::predict_index(std::size_t u, std::size_t i) const {
  std::vector<std::pair<double, std::size_t>> cands;  // (sim, rater slot)
  const auto& raters = raters_[i];
  for (std::size_t k = 0; k < raters.size(); ++k) {
    if (raters[k].first == u) continue;
    const double s = similarity_index(u, raters[k].first);
    if (s > 0.0) cands.emplace_back(s, k);
  }
  if (cands.empty()) return clamp_rating(user_mean_[u] + item_bias_[i]);
  const std::size_t keep = std::min(neighbors_, cands.size());
  std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                    [&](const auto& a, const auto& b) {
                      return a.first > b.first ||
                             (a.first == b.first && raters[a.second].first < raters[b.second].first);
                    });
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < keep; ++k) {
    const auto [s, slot] = cands[k];
    const auto [v, r] = raters[slot];
    num += s * (r - user_mean_[v]);
    den += std::abs(s);
  }
  return clamp_rating(user_mean_[u] + num / den);
}

double RatingModel::predict(std::string_view user, std::string_view item) const {
  const auto iu = user_idx_.find(std::string(user));
  const auto ii = item_idx_.find(std::string(item));
  const bool ku = iu != user_idx_.end();
  const bool ki = ii != item_idx_.end();
  if (ku && ki) return predict_index(iu->second, ii->second);
  if (ku) return clamp_rating(user_mean_[iu->second]);
  if (ki) return clamp_rating(global_mean_ + item_bias_[ii->second]);
  return clamp_rating(global_mean_);
}

std::vector<Recommendation> RatingModel::top_n(std::string_view user, std::size_t n,
                                               const std::set<std::string>& seen) const {
  struct Scored {
    double r;
    std::size_t count;
    std::size_t item;
  };
  std::vector<Scored> scored;
  const auto iu = user_idx_.find(std::string(user));
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (seen.contains(items_[i])) continue;
    const double r = iu != user_idx_.end() ? predict_index(iu->second, i)
                                           : clamp_rating(global_mean_ + item_bias_[i]);
    scored.push_back({r, raters_[i].size(), i});
  }
  // items_ is sorted, so index order is item-id order.
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.r != b.r) return a.r > b.r;
    if (a.count != b.count) return a.count > b.count;
    return a.item < b.item;
  });
  if (scored.size() > n) scored.resize(n);
  std::vector<Recommendation> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back({items_[s.item], s.r});
  return out;
}

std::set<std::string> RatingModel::rated_items(std::string_view user) const {
  std::set<std::string> out;
  const auto iu = user_idx_.find(std::string(user));
  if (iu == user_idx_.end()) return out;
  for (std::size_t i = 0; i < items_.size(); ++i)
    for (const auto& [v, r] : raters_[i])
      if (v == iu->second) out.insert(items_[i]);
  return out;
}

void RatingModel::save(const std::filesystem::path& manifest, const json& meta) const {
  Archive a;
  a.meta = meta;
  a.meta["kind"] = "rating_model";
  a.meta["users"] = users_;
  a.meta["items"] = items_;
  a.meta["global_mean"] = global_mean_;
  a.meta["neighbors"] = neighbors_;
  const std::size_t f = p_.cols();
  a.tensors.push_back({"user_factors", {p_.rows(), f}, {p_.flat().begin(), p_.flat().end()}});
  a.tensors.push_back({"item_factors", {q_.rows(), f}, {q_.flat().begin(), q_.flat().end()}});
  a.tensors.push_back({"singular_values", {sigma_.size()}, sigma_});
  a.tensors.push_back({"user_means", {user_mean_.size()}, user_mean_});
  a.tensors.push_back({"item_biases", {item_bias_.size()}, item_bias_});
  NamedTensor obs{"ratings", {0, 3}, {}};
  for (std::size_t i = 0; i < raters_.size(); ++i)
    for (const auto& [u, r] : raters_[i]) {
      obs.values.push_back(static_cast<double>(u));
      obs.values.push_back(static_cast<double>(i));
      obs.values.push_back(r);
    }
  obs.shape[0] = obs.values.size() / 3;
  a.tensors.push_back(std::move(obs));
  save_archive(manifest, a);
}

RatingModel RatingModel::load(const std::filesystem::path& manifest) {
  const auto a = load_archive(manifest);
  if (a.meta.value("kind", "") != "rating_model")
    throw IoError(manifest.string() + " is not a rating model artifact");
  RatingModel m;
  m.users_ = a.meta.at("users").get<std::vector<std::string>>();
  m.items_ = a.meta.at("items").get<std::vector<std::string>>();
  m.global_mean_ = a.meta.at("global_mean").get<double>();
  m.neighbors_ = a.meta.at("neighbors").get<std::size_t>();
  auto matrix = [&](const std::string& name) {
    const auto& t = a.get(name);
    if (t.shape.size() != 2) throw IoError("tensor '" + name + "' is not 2-D");
    Matrix out(t.shape[0], t.shape[1]);
    std::copy(t.values.begin(), t.values.end(), out.flat().begin());
    return out;
  };
  m.p_ = matrix("user_factors");
  m.q_ = matrix("item_factors");
  m.sigma_ = a.get("singular_values").values;
  m.user_mean_ = a.get("user_means").values;
  m.item_bias_ = a.get("item_biases").values;
  if (m.p_.rows() != m.users_.size() || m.q_.rows() != m.items_.size() ||
      m.user_mean_.size() != m.users_.size() || m.item_bias_.size() != m.items_.size())
    throw IoError("rating model tensors do not match its id lists");
  const auto& obs = a.get("ratings").values;
  m.raters_.assign(m.items_.size(), {});
  for (std::size_t k = 0; k + 2 < obs.size(); k += 3) {
    const auto u = static_cast<std::size_t>(obs[k]);
    const auto i = static_cast<std::size_t>(obs[k + 1]);
    if (u >= m.users_.size() || i >= m.items_.size()) throw IoError("rating index out of range");
    m.raters_[i].emplace_back(u, obs[k + 2]);
  }
  for (auto& r : m.raters_) std::sort(r.begin(), r.end());
  m.index();
  return m;
}

// ---------------------------------------------------------------------------

double MfModel::raw(std::size_t u, std::size_t i) const {
  return mu_ + bu_[u] + bi_[i] + dot(p_.row(u), q_.row(i));
}

MfModel MfModel::fit(std::span<const RatingTriple> ratings, const MfOptions& opts,
                     std::vector<double>* epoch_rmse) {
  if (ratings.empty()) throw DomainError("MfModel::fit: no ratings");
  MfModel m;
  struct Obs {
    std::size_t u, i;
    double r;
  };
  std::vector<Obs> obs;
  obs.reserve(ratings.size());
  double sum = 0.0;
  for (const auto& r : ratings) {
    const auto u = m.user_idx_.try_emplace(r.user, m.user_idx_.size()).first->second;
    const auto i = m.item_idx_.try_emplace(r.item, m.item_idx_.size()).first->second;
    obs.push_back({u, i, r.value});
    sum += r.value;
  }
  m.mu_ = sum / static_cast<double>(obs.size());
  m.bu_.assign(m.user_idx_.size(), 0.0);
  m.bi_.assign(m.item_idx_.size(), 0.0);
  m.p_ = Matrix(m.user_idx_.size(), opts.factors);
  m.q_ = Matrix(m.item_idx_.size(), opts.factors);  // zero: p.q starts at 0
  Lcg64 rng(opts.seed);
  for (auto& x : m.p_.flat()) x = 0.1 * rng.normal();

  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), 0);
  const double lr = opts.learning_rate;
  const double reg = opts.regularization;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    shuffle_in_place(order, rng);
    for (const auto k : order) {
      const auto& o = obs[k];
      const double e = o.r - m.raw(o.u, o.i);
      m.bu_[o.u] += lr * (e - reg * m.bu_[o.u]);
      m.bi_[o.i] += lr * (e - reg * m.bi_[o.i]);
      auto pu = m.p_.row(o.u);
      auto qi = m.q_.row(o.i);
      for (std::size_t f = 0; f < opts.factors; ++f) {
        const double p = pu[f];
        pu[f] += lr * (e * qi[f] - reg * p);
        qi[f] += lr * (e * p - reg * qi[f]);
      }
    }
    double se = 0.0;
    for (const auto& o : obs) {
      const double e = o.r - m.raw(o.u, o.i);
      se += e * e;
    }
    const double rmse = std::sqrt(se / static_cast<double>(obs.size()));
    if (!std::isfinite(rmse))
      throw NumericError("MfModel::fit: diverged at epoch " + std::to_string(epoch));
    if (epoch_rmse) epoch_rmse->push_back(rmse);
  }
  return m;
}

double MfModel::predict(std::string_view user, std::string_view item) const {
  const auto iu = user_idx_.find(std::string(user));
  const auto ii = item_idx_.find(std::string(item));
  double r = mu_;
  if (iu != user_idx_.end()) r += bu_[iu->second];
  if (ii != item_idx_.end()) r += bi_[ii->second];
  if (iu != user_idx_.end() && ii != item_idx_.end()) r += dot(p_.row(iu->second), q_.row(ii->second));
  return std::clamp(r, 1.0, 5.0);
}

}  // namespace dcrec
