#pragma once

// Two-channel convolutional network for joint aspect tagging and review
// polarity.
//
//   word channel:  L x d_w  --conv(w=5)--+
//                           --conv(w=3)--+
//   POS channel:   L x 45   --conv(w=5)--+--> ReLU, concat: L x H
//                           --conv(w=3)--+
//
//   tag head:        dropout(L x H) -> dense(H -> 3) -> softmax per token (B, I, O)
//   sentiment head:  max over tokens of the pre-dropout L x H -> dense(H -> 1) -> sigmoid
//
// With the default 128 + 128 word filters and 32 + 32 POS filters, H = 320.
// Embeddings are inputs, never parameters.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcrec/corpus.hpp"
#include "dcrec/matrix.hpp"

namespace dcrec {

enum class BioTag : std::uint8_t { B = 0, I = 1, O = 2 };
inline constexpr std::size_t kBioClasses = 3;

enum class Padding { Valid, Same };

/// F filters of one width over C input channels. Kernels are stored as an
/// F x (width * C) matrix, row-major in (tap, channel).
struct ConvBlock {
  std::size_t width = 0;
  Padding padding = Padding::Same;
  Matrix kernels;
  std::vector<double> bias;

  ConvBlock() = default;
  ConvBlock(std::size_t filters, std::size_t width, std::size_t channels,
            Padding padding = Padding::Same);

  std::size_t filters() const noexcept { return kernels.rows(); }
  std::size_t channels() const noexcept { return width == 0 ? 0 : kernels.cols() / width; }
  double& kernel(std::size_t f, std::size_t tap, std::size_t c) {
    return kernels(f, tap * channels() + c);
  }
};

/// Pre-activation convolution (bias + weighted taps, zero padded for Same).
Matrix conv1d_linear(const Matrix& input, const ConvBlock& block);
/// conv1d_linear followed by ReLU. Throws ShapeError when a Valid block is
/// longer than the input or channel counts differ.
Matrix conv1d_forward(const Matrix& input, const ConvBlock& block);

struct PoolResult {
  std::vector<double> values;
  std::vector<std::size_t> argmax;  // first row attaining the maximum
};
PoolResult global_max_pool(const Matrix& features);

struct DcnnConfig {
  std::size_t seq_len = 100;
  std::size_t word_dim = 300;
  std::size_t pos_dim = 45;
  std::vector<std::size_t> widths{5, 3};
  std::size_t word_filters = 128;  // per width; 0 disables the word channel
  std::size_t pos_filters = 32;    // per width; 0 disables the POS channel
  double dropout = 0.5;

  std::size_t feature_width() const noexcept {
    return widths.size() * (word_filters + pos_filters);
  }
};

/// Every trainable tensor of the network. Also used for gradients and the
/// Adam moments, which share the layout.
struct DcnnParams {
  std::vector<ConvBlock> word_convs;
  std::vector<ConvBlock> pos_convs;
  Matrix tag_weights;                // 3 x H
  std::vector<double> tag_bias;      // 3
  std::vector<double> sent_weights;  // H
  std::vector<double> sent_bias;     // 1

  static DcnnParams zeros(const DcnnConfig& config);

  /// Calls fn(name, values) for every tensor in a fixed order.
  void visit(const std::function<void(const std::string&, std::span<double>)>& fn);
  void visit(const std::function<void(const std::string&, std::span<const double>)>& fn) const;
  std::size_t count() const;
  void add_scaled(const DcnnParams& other, double scale);
  void set_zero();
};

class DcnnModel {
 public:
  DcnnModel() = default;
  /// Glorot-uniform kernels and dense weights, zero biases.
  DcnnModel(DcnnConfig config, std::uint64_t seed);
  static DcnnModel zeros(DcnnConfig config);

  const DcnnConfig& config() const noexcept { return config_; }
  const DcnnParams& params() const noexcept { return params_; }
  /// Mutable access bumps the version so caches from earlier forward
  /// passes are rejected by backward().
  DcnnParams& mutable_params() noexcept {
    ++version_;
    return params_;
  }
  std::uint64_t version() const noexcept { return version_; }

 private:
  DcnnConfig config_;
  DcnnParams params_;
  std::uint64_t version_ = 0;
};

struct DcnnInput {
  Matrix word;             // L x d_w
  Matrix pos;              // L x 45
  std::size_t length = 0;  // real (unpadded) tokens, <= L
};

struct DcnnSample {
  DcnnInput input;
  std::vector<BioTag> tags;  // gold tags for the first tags.size() tokens; empty = none
  std::optional<Polarity> label;
  bool synthetic = false;
};

struct ForwardCache {
  std::uint64_t model_version = 0;
  const DcnnInput* input = nullptr;
  std::vector<Matrix> word_pre;  // pre-activation per block
  std::vector<Matrix> pos_pre;
  Matrix features;               // L x H after ReLU
  Matrix dropout_scale;          // L x H, empty in eval mode
  Matrix dropped;                // L x H fed to the tag head
  PoolResult pooled;
};

struct ForwardResult {
  Matrix tag_probs;  // L x 3
  double sentiment_prob = 0.5;
  ForwardCache cache;
};

/// Inverted dropout with a mask drawn from Lcg64(seed) in train mode only.
/// The cache keeps a pointer to `input`, which must outlive it.
ForwardResult forward(const DcnnModel& model, const DcnnInput& input, bool train_mode,
                      std::uint64_t seed);

struct LossBreakdown {
  double tag = 0.0;        // mean token cross-entropy (0 without gold tags)
  double sentiment = 0.0;  // binary cross-entropy (0 without a label)
  double total = 0.0;      // tag + lambda * sentiment
};

/// Probabilities are clamped at 1e-12 before the log.
LossBreakdown loss(const Matrix& tag_probs, std::span<const BioTag> gold_tags,
                   double sentiment_prob, std::optional<Polarity> gold_label, double lambda);

/// Analytic gradient of loss() w.r.t. every parameter. Throws DomainError
/// when the cache was produced for a different model version.
DcnnParams backward(const DcnnModel& model, const ForwardResult& fwd,
                    std::span<const BioTag> gold_tags, std::optional<Polarity> gold_label,
                    double lambda);

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  /// Called after every epoch with (epoch, mean loss); return false to stop.
  std::function<bool(std::size_t, double)> on_epoch;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
};

/// Mini-batch Adam over seeded shuffles. Bitwise deterministic for a given
/// seed regardless of thread count. Throws NumericError on a non-finite
/// loss.
TrainReport train(DcnnModel& model, std::span<const DcnnSample> data, const TrainOptions& opts);

struct DcnnPrediction {
  std::vector<BioTag> tags;  // first `length` tokens
  double sentiment_prob = 0.5;
};
DcnnPrediction predict(const DcnnModel& model, const DcnnInput& input);

struct GradientCheckOptions {
  double lambda = 1.0;
  std::size_t max_checked = 10'000;
  std::uint64_t seed = 0;
  /// Optional hook that alters the analytic gradient before comparison
  /// (negative-control tests).
  std::function<void(DcnnParams&)> tamper;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;           // "tensor[index]" of the max error
  std::vector<std::string> offending;    // every entry above the tolerance
  std::size_t checked = 0;

  bool passed() const noexcept { return offending.empty(); }
};

/// Compares backward() against central differences (f(p+eps)-f(p-eps))/2eps
/// in eval mode. Relative error is |a - n| / max(|a|, |n|, 1e-6). Above
/// `max_checked` parameters a seeded subsample is checked. Failures are
/// reported, never thrown.
GradientCheckReport gradient_check(const DcnnModel& model, const DcnnSample& sample,
                                   double epsilon, double tolerance,
                                   const GradientCheckOptions& opts = {});

/// Writes the model as a manifest plus float32 blob; `meta` is stored
/// alongside the network configuration.
void save_model(const DcnnModel& model, const std::filesystem::path& manifest,
                const nlohmann::json& meta);
/// Reads a model written by save_model. `meta`, when given, receives the
/// stored metadata.
DcnnModel load_model(const std::filesystem::path& manifest, nlohmann::json* meta = nullptr);

}  // namespace dcrec
