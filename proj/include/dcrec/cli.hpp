#pragma once

// Batch pipeline: preprocess -> train -> extract -> recommend -> evaluate.
// Each stage reads the artifacts of the previous ones from the output
// directory and writes its own, stamped with the config hash and seed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace dcrec {

struct PipelineConfig {
  // Input paths; empty means the shipped default (embeddings: hashed
  // vectors, dataset: required).
  std::filesystem::path dataset;
  std::filesystem::path embeddings;
  std::filesystem::path stopwords;
  std::filesystem::path contractions;
  std::filesystem::path opinion_lexicon;
  std::filesystem::path negations;
  std::filesystem::path tagger_lexicon;
  std::filesystem::path out = "out";

  std::size_t seq_len = 100;       // L
  std::size_t word_dim = 300;      // d_w; must match the embeddings file
  std::size_t word_filters = 128;  // per width
  std::size_t pos_filters = 32;    // per width
  double dropout = 0.5;
  std::size_t svd_rank = 20;  // f
  std::size_t cp_rank = 3;    // r
  std::size_t cp_max_iters = 500;
  std::size_t smote_k = 5;
  std::size_t neighbors = 30;  // k_nn
  std::size_t power_iters = 5;
  std::size_t oversample = 8;
  double theta = 0.6;
  double alpha = 0.5;
  double lambda = 1.0;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double train_fraction = 0.8;
  std::size_t min_count = 1;
  std::size_t window = 4;
  std::size_t top_n = 5;
  std::optional<std::uint64_t> seed;

  /// Flat JSON object; relative paths are resolved against `base_dir`.
  /// Unknown keys and out-of-range values throw ConfigError.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static PipelineConfig load(const std::filesystem::path& path);
  /// Sets one key as if it appeared in the config file.
  void set(const std::string& key, const nlohmann::json& value,
           const std::filesystem::path& base_dir = {});
  /// Throws ConfigError for missing inputs, a missing seed or bad ranges.
  void validate() const;
  nlohmann::json to_json() const;
  /// Hex FNV-1a of the canonical JSON, excluding the output directory.
  std::string hash() const;
  std::uint64_t seed_value() const;
};

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumeric = 4,
};

struct StageSummary {
  std::string stage;
  nlohmann::json info;
};

StageSummary cmd_preprocess(const PipelineConfig& cfg);
StageSummary cmd_train(const PipelineConfig& cfg);
StageSummary cmd_extract(const PipelineConfig& cfg);
/// Fits the rating model and writes the top-n list for `user` (all users
/// when empty).
StageSummary cmd_recommend(const PipelineConfig& cfg, const std::string& user = {},
                           std::optional<std::size_t> n = std::nullopt);
StageSummary cmd_evaluate(const PipelineConfig& cfg);
/// The five stages above, in order.
nlohmann::json cmd_pipeline(const PipelineConfig& cfg);

/// Maps the library exception hierarchy onto ExitCode.
int exit_code_for(const std::exception& e) noexcept;

namespace artifacts {
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kVocab = "vocab.tsv";
inline constexpr const char* kModel = "dcnn.json";
inline constexpr const char* kTrainReport = "train_report.json";
inline constexpr const char* kAspects = "aspects.tsv";
inline constexpr const char* kClusters = "clusters.json";
inline constexpr const char* kWeighted = "weighted_ratings.tsv";
inline constexpr const char* kRatingModel = "rating_model.json";
inline constexpr const char* kRecommendations = "recommendations.tsv";
inline constexpr const char* kMetrics = "metrics.json";
}  // namespace artifacts

}  // namespace dcrec
