// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_NN_HPP_
#define SEMGUARD_NN_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/diffusion.hpp"
#include "semguard/image.hpp"
#include "semguard/rng.hpp"

namespace semguard {

inline constexpr int kNullLabel = -1;

struct ScoreNetConfig {
  int channels = 1;
  int side = 16;
  int width = 16;
  int blocks = 3;
  int embed_dim = 32;
  /// 0 builds an unconditional network (only the null label is accepted).
  int num_classes = 4;
  /// Largest timestep accepted by eval (the schedule's T).
  int max_timestep = 200;
  friend bool operator==(const ScoreNetConfig&, const ScoreNetConfig&) = default;
};

/// Residual convolutional noise predictor eps_theta(x_t, t[, y]).
///
/// Each residual block adds a per-channel bias projected from the
/// sinusoidal timestep embedding (plus a learned class embedding; row
/// `num_classes` of the table is the null label). The output convolution is
/// zero-initialized. Evaluation is const and thread-safe.
class ScoreNetwork {
 public:
  ScoreNetwork(const ScoreNetConfig& config, std::uint64_t seed);

  const ScoreNetConfig& config() const { return config_; }
  bool conditional() const { return config_.num_classes > 0; }

  /// Predicted noise. Throws ArgumentError when t is outside [1, T], the
  /// label is invalid, or the image shape does not match.
  Image eval(const Image& x_t, int t, int y = kNullLabel) const;
  std::vector<Image> eval_batch(std::span<const Image* const> x_t, std::span<const int> t,
                                std::span<const int> y) const;

  /// Vector-Jacobian product upstream^T * d eps / d x_t. Optionally returns
  /// the forward value.
  Image input_vjp(const Image& x_t, int t, int y, const Image& upstream,
                  Image* eps_out = nullptr) const;

  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }

  /// Bound predictor for the diffusion routines.
  NoisePredictor predictor(int y = kNullLabel) const;

  struct Layout;

 private:
  void validate(const Image& x, int t, int y) const;
  ScoreNetConfig config_;
  std::vector<double> params_;
  std::shared_ptr<const Layout> layout_;
  friend struct ScoreNetAccess;
};

struct ClassifierConfig {
  int channels = 1;
  int side = 16;
  int width1 = 8;
  int width2 = 16;
  int width3 = 16;
  int num_classes = 4;
  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

/// One layer's activations for a single image, channel-major.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;
  double at(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

/// conv-relu (block1, full res) -> conv-relu-avgpool (block2, half res) ->
/// conv-relu (block3, the Grad-CAM layer) -> global average pool -> dense.
class Classifier {
 public:
  /// Names accepted by `features`.
  static constexpr std::string_view kLayerNames[] = {"block1", "block2", "block3"};

  Classifier(const ClassifierConfig& config, std::uint64_t seed);

  const ClassifierConfig& config() const { return config_; }
  int num_classes() const { return config_.num_classes; }

  std::vector<double> logits(const Image& x) const;
  std::vector<std::vector<double>> logits_batch(std::span<const Image* const> x) const;

  /// grad_x log softmax(logits(x))[y].
  Image input_log_prob_grad(const Image& x, int y) const;
  /// Batched version; also returns log p(y_i | x_i) through `log_probs`.
  std::vector<Image> input_log_prob_grad_batch(std::span<const Image* const> x,
                                               std::span<const int> y,
                                               std::vector<double>* log_probs = nullptr) const;

  /// Grad-CAM of class y at the block3 layer, rectified, bilinearly resized
  /// to the input resolution and divided by its maximum. All-zero when the
  /// rectified map vanishes.
  Image grad_cam(const Image& x, int y) const;

  /// Activations of the named layers, in the order requested. Throws
  /// ConfigError for an unknown name.
  std::vector<FeatureMap> features(const Image& x, std::span<const std::string> layers) const;

  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }

  struct Layout;

 private:
  void validate(const Image& x) const;
  ClassifierConfig config_;
  std::vector<double> params_;
  std::shared_ptr<const Layout> layout_;
  friend struct ClassifierAccess;
};

/// Index of the largest value; the lowest index wins ties.
int argmax(std::span<const double> values);
std::vector<double> softmax(std::span<const double> logits);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 64;
  double learning_rate = 2e-3;
  /// Final learning rate as a fraction of the initial one (cosine decay).
  double final_lr_fraction = 0.1;
  std::uint64_t seed = 1;
  /// Probability of replacing the label by the null label (score nets).
  double p_uncond = 0.1;
  /// Exponential moving average of the weights, returned as the trained
  /// parameters. 0 disables it.
  double ema_decay = 0.0;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct TrainResult {
  /// One mean loss per optimizer step.
  std::vector<double> loss_curve;
  long null_label_draws = 0;
  long total_draws = 0;
};

/// Denoising objective E||eps - eps_theta(x_t, t, y)||^2 with t uniform on
/// [1, T]. Throws TrainingError if the loss becomes non-finite. Parameters
/// end on float32-representable values so checkpoints round-trip exactly.
TrainResult train_score(ScoreNetwork& net, std::span<const Image> images,
                        std::span<const int> labels, const NoiseSchedule& schedule,
                        const TrainConfig& config);

/// Cross-entropy training of the classifier on clean images.
TrainResult train_classifier(Classifier& clf, std::span<const Image> images,
                             std::span<const int> labels, const TrainConfig& config);

enum class AccuracyMode { kRawXt, kXhat0 };

struct AccuracyPoint {
  int t = 0;
  double accuracy = 0.0;
};

/// Classifier accuracy on x_t (raw) or on x0_hat(x_t) (the score net's
/// clean estimate, unconditional branch) for each t in `grid`; t = 0 feeds
/// the clean image in both modes.
std::vector<AccuracyPoint> accuracy_vs_timestep(const Classifier& clf, const ScoreNetwork& net,
                                                std::span<const Image> images,
                                                std::span<const int> labels,
                                                const NoiseSchedule& schedule,
                                                AccuracyMode mode, std::span<const int> grid,
                                                const RngStream& rng);

std::string serialize_model(const ScoreNetwork& net);
std::string serialize_model(const Classifier& clf);
ScoreNetwork deserialize_score_network(std::string_view bytes);
Classifier deserialize_classifier(std::string_view bytes);

void save_model(const ScoreNetwork& net, const std::filesystem::path& path);
void save_model(const Classifier& clf, const std::filesystem::path& path);
ScoreNetwork load_score_network(const std::filesystem::path& path);
Classifier load_classifier(const std::filesystem::path& path);

}  // namespace semguard

#endif  // SEMGUARD_NN_HPP_
