// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_COMMANDS_HPP_
#define SEMGUARD_COMMANDS_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/config.hpp"
#include "semguard/data_synth.hpp"
#include "semguard/detection.hpp"
#include "semguard/eval.hpp"
#include "semguard/nn.hpp"

namespace semguard {

enum class TrainTarget { kScore, kClassifier };

enum class DiagnoseKind {
  kAccVsT,
  kDegradationCurves,
  kCutpointSweep,
  kStepsSweep,
  kAesThresholdTable,
  kCleanGradAblation,
};
std::string_view diagnose_kind_name(DiagnoseKind kind);
std::optional<DiagnoseKind> parse_diagnose_kind(std::string_view name);

/// Dataset, schedule and trained models of a run, loaded after checking the
/// manifest checksums.
struct RunContext {
  RunConfig config;
  Dataset dataset;
  NoiseSchedule schedule;
  ScoreNetwork score;
  Classifier classifier;
  /// Mean pixel of the training images.
  double train_mean = 0.0;
};

RunContext load_context(const RunConfig& config);

/// Item indices of `split`, at most `per_class_limit` per class (0 = all),
/// in dataset order.
std::vector<std::size_t> select_indices(const Dataset& dataset, Split split, int per_class_limit);

/// AES thresholds from the settings, calibrating unset ones on InD
/// validation images.
AesConfig calibrate_aes(const RunContext& ctx, const DetectorConfig& detector);

/// The run's detector with cutout fill and AES thresholds resolved.
DetectorConfig resolve_detector(const RunContext& ctx);

std::vector<DetectionRecord> run_detection(const RunContext& ctx, const DetectorConfig& detector,
                                           std::span<const std::size_t> indices);

/// Band from the InD validation split for the given baseline.
TandemConfig calibrate_tandem_band(const RunContext& ctx, Baseline baseline);

/// Valid records as OOD-oriented scored samples under `scorer`: diffguard,
/// mls, ebo, tandem_mls, tandem_ebo, or a metric name.
std::vector<ScoredSample> scored_samples(const std::vector<DetectionRecord>& records,
                                         std::string_view scorer,
                                         const TandemConfig* mls_band = nullptr,
                                         const TandemConfig* ebo_band = nullptr);

std::string detection_csv(const std::vector<DetectionRecord>& records,
                          const TandemConfig& mls_band, const TandemConfig& ebo_band);

void cmd_gen_data(const RunConfig& config);
TrainResult cmd_train(const RunConfig& config, TrainTarget target);

struct DetectOutput {
  std::vector<DetectionRecord> records;
  std::filesystem::path csv;
};
DetectOutput cmd_detect(const RunConfig& config);

struct ScorerReport {
  std::string scorer;
  EvalReport report;
};
/// Evaluates every score column present in a detection CSV.
std::vector<ScorerReport> cmd_eval(const RunConfig& config, const std::filesystem::path& csv);

std::filesystem::path cmd_diagnose(const RunConfig& config, DiagnoseKind kind);

}  // namespace semguard

#endif  // SEMGUARD_COMMANDS_HPP_
