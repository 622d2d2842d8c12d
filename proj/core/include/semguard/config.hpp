// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_CONFIG_HPP_
#define SEMGUARD_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/data_synth.hpp"
#include "semguard/detection.hpp"
#include "semguard/diffusion.hpp"
#include "semguard/nn.hpp"

namespace semguard {

struct PathsConfig {
  std::string dataset = "dataset.sgds";
  std::string score_model = "score.sgck";
  std::string classifier_model = "classifier.sgck";
  /// Relative artifact paths resolve against this directory.
  std::string output_dir = "run";
  friend bool operator==(const PathsConfig&, const PathsConfig&) = default;
};

/// AES settings before calibration. Unset thresholds are calibrated on InD
/// validation images as the given quantile of the metric at t_max.
struct AesSettings {
  std::vector<MetricKind> metrics = {MetricKind::kPsnr, MetricKind::kFsd};
  std::optional<double> psnr_threshold;
  std::optional<double> fsd_threshold;
  AesCombine combine = AesCombine::kAny;
  std::optional<int> t_max;
  double calibration_quantile = 0.5;
  int calibration_per_class = 25;
  friend bool operator==(const AesSettings&, const AesSettings&) = default;
};

struct DetectSettings {
  Split split = Split::kTest;
  /// 0 = every sample of the split.
  int per_class_limit = 0;
  bool dump_images = false;
  friend bool operator==(const DetectSettings&, const DetectSettings&) = default;
};

struct DiagnoseSettings {
  int per_class_limit = 25;
  std::vector<double> cutpoints = {0.0, 0.2, 0.6};
  std::vector<int> tau_lengths = {10, 25, 50};
  std::vector<double> aes_threshold_factors = {0.8, 1.0, 1.2};
  int timestep_grid_points = 10;
  friend bool operator==(const DiagnoseSettings&, const DiagnoseSettings&) = default;
};

struct RunConfig {
  /// Root seed. Every stochastic stage draws from a named child stream.
  std::uint64_t seed = 20260401;
  PathsConfig paths;
  DatasetSpec data = DatasetSpec::reference();
  int diffusion_steps = 200;
  ScheduleKind schedule = ScheduleKind::kLinear;
  ScoreNetConfig score_net;
  ClassifierConfig classifier_net;
  TrainConfig score_train;
  TrainConfig classifier_train;
  DetectorConfig detector;
  /// Cutout fill; nullopt uses the mean pixel of the training images.
  std::optional<double> cutout_fill;
  AesSettings aes;
  TandemConfig tandem;
  DetectSettings detect;
  DiagnoseSettings diagnose;

  RunConfig();
  /// Throws ConfigError for the first violated invariant.
  void validate() const;
  /// Artifact path resolved against output_dir.
  std::filesystem::path resolve(const std::string& path) const;
  /// Derived seed for a named stage.
  std::uint64_t stage_seed(std::string_view stage) const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Flat `section.key = value` text; '#' starts a comment line.
RunConfig parse_config(std::string_view text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);

/// Applies one `key=value` override; `origin` names it in errors.
void apply_override(RunConfig& config, std::string_view assignment,
                    std::string_view origin = "--set");

/// Keys accepted by parse_config, in serialization order.
std::vector<std::string> config_keys();

}  // namespace semguard

#endif  // SEMGUARD_CONFIG_HPP_
