#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dcrec/aspects.hpp"
#include "dcrec/matrix.hpp"

namespace dcrec {

struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SparseEntry> entries;
};

/// The dense matrix obtained from a sparse rating matrix by filling every
/// missing (u, i) with mu_u + mu_i - mu and, when centering, subtracting
/// mu_u from every row. Never materialized: it is stored as the sparse
/// residual plus two rank-one terms.
class ImputedMatrix {
 public:
  ImputedMatrix(const SparseMatrix& m, bool center);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  /// M * x (x is cols x k).
  Matrix times(const Matrix& x) const;
  /// M^T * y (y is rows x k).
  Matrix transpose_times(const Matrix& y) const;
  Matrix dense() const;

  const std::vector<double>& row_means() const noexcept { return row_mean_; }
  const std::vector<double>& col_means() const noexcept { return col_mean_; }
  double global_mean() const noexcept { return mean_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  double mean_ = 0.0;
  std::vector<double> row_mean_, col_mean_;
  std::vector<double> row_shift_;  // a_u
  std::vector<double> col_shift_;  // b_i
  // residual S_ui = value - row_shift_u - col_shift_i - centering, CSR + CSC
  std::vector<std::size_t> row_ptr_, row_col_;
  std::vector<double> row_val_;
  std::vector<std::size_t> col_ptr_, col_row_;
  std::vector<double> col_val_;
};

struct SvdOptions {
  std::size_t rank = 20;
  std::size_t power_iters = 5;
  std::size_t oversample = 8;
  std::uint64_t seed = 0;
  bool center = true;
};

struct TruncatedSvd {
  Matrix user_factors;  // P = U_f Sigma^(1/2)
  Matrix item_factors;  // Q = V_f Sigma^(1/2)
  std::vector<double> singular_values;
  Matrix left;   // U_f
  Matrix right;  // V_f
};

/// Rank-f SVD of the imputed (and optionally row-centered) matrix by seeded
/// randomized subspace iteration. f > min(rows, cols) is clamped with a
/// warning. At least kMinPowerIters power iterations are always run.
inline constexpr std::size_t kMinPowerIters = 5;
TruncatedSvd truncated_svd(const SparseMatrix& m, const SvdOptions& opts);

struct RatingModelOptions {
  std::size_t rank = 20;
  std::size_t neighbors = 30;
  std::size_t power_iters = 5;
  std::size_t oversample = 8;
  std::uint64_t seed = 0;
};

struct Recommendation {
  std::string item;
  double predicted = 0.0;
};

/// User-based collaborative filtering in the latent space of a truncated
/// SVD of the (weighted) rating matrix. Immutable after fit.
class RatingModel {
 public:
  static RatingModel fit(std::span<const RatingTriple> ratings, const RatingModelOptions& opts);

  /// mu_u + sum sim(u,v) (r_vi - mu_v) / sum |sim(u,v)| over the k most
  /// similar users with sim > 0 who rated i; falls back to mu_u + b_i,
  /// then to mu (+ b_i). Always clamped to [1, 5].
  double predict(std::string_view user, std::string_view item) const;
  /// Cosine of the users' latent vectors (0 if either is all-zero). Throws
  /// DomainError for unknown users.
  double user_similarity(std::string_view u, std::string_view v) const;

  /// Unseen items by predicted rating, ties by number of ratings
  /// (descending) and then item id.
  std::vector<Recommendation> top_n(std::string_view user, std::size_t n,
                                    const std::set<std::string>& seen) const;
  /// Items the user rated during fit.
  std::set<std::string> rated_items(std::string_view user) const;

  std::size_t users() const noexcept { return users_.size(); }
  std::size_t items() const noexcept { return items_.size(); }
  std::size_t rank() const noexcept { return p_.cols(); }
  double global_mean() const noexcept { return global_mean_; }
  const std::vector<double>& singular_values() const noexcept { return sigma_; }
  const Matrix& user_factors() const noexcept { return p_; }
  const Matrix& item_factors() const noexcept { return q_; }

  void save(const std::filesystem::path& manifest, const nlohmann::json& meta) const;
  static RatingModel load(const std::filesystem::path& manifest);

 private:
  double predict_index(std::size_t u, std::size_t i) const;
  double similarity_index(std::size_t u, std::size_t v) const;
  void index();

  std::vector<std::string> users_, items_;
  std::unordered_map<std::string, std::size_t> user_idx_, item_idx_;
  std::vector<double> user_mean_, item_bias_;
  double global_mean_ = 0.0;
  Matrix p_, q_;
  std::vector<double> sigma_;
  std::vector<double> p_norm_;
  std::vector<std::vector<std::pair<std::size_t, double>>> raters_;  // per item, by user
  std::size_t neighbors_ = 30;
};

struct MfOptions {
  std::size_t factors = 10;
  std::size_t epochs = 50;
  double learning_rate = 0.01;
  double regularization = 0.02;
  std::uint64_t seed = 0;
};

/// Biased matrix factorization r = mu + b_u + b_i + p_u . q_i fitted by
/// SGD. The comparison baseline for the recommender.
class MfModel {
 public:
  /// `epoch_rmse`, when given, receives the training RMSE after each epoch.
  static MfModel fit(std::span<const RatingTriple> ratings, const MfOptions& opts,
                     std::vector<double>* epoch_rmse = nullptr);
  double predict(std::string_view user, std::string_view item) const;

 private:
  double raw(std::size_t u, std::size_t i) const;

  std::unordered_map<std::string, std::size_t> user_idx_, item_idx_;
  double mu_ = 0.0;
  std::vector<double> bu_, bi_;
  Matrix p_, q_;
};

}  // namespace dcrec
