// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_DETECTION_HPP_
#define SEMGUARD_DETECTION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semguard/aes.hpp"
#include "semguard/data_synth.hpp"
#include "semguard/diffusion.hpp"
#include "semguard/guidance.hpp"
#include "semguard/nn.hpp"
#include "semguard/rng.hpp"
#include "semguard/similarity.hpp"

namespace semguard {

enum class LabelSource { kClassifier, kOracle };
std::string_view label_source_name(LabelSource source);
std::optional<LabelSource> parse_label_source(std::string_view name);

struct DetectorConfig {
  GuidanceConfig guidance;
  SamplerConfig sampler;
  /// nullopt picks 50 on the classifier path and 25 on the classifier-free
  /// path.
  std::optional<int> tau_length;
  bool aes_enabled = true;
  /// Also stop early on the classifier-free path.
  bool aes_on_cfg = false;
  AesConfig aes;
  /// Restrict classifier-free guidance to the CAM region.
  bool use_dsg = true;
  MetricKind metric = MetricKind::kLogitsL1;
  FsdConfig fsd;
  LabelSource label_source = LabelSource::kClassifier;
  double ebo_temperature = 1.0;
  std::uint64_t seed = 7;

  int resolved_tau_length() const;
  bool aes_active() const;
  void validate() const;
  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct Models {
  const ScoreNetwork* score = nullptr;
  const Classifier* classifier = nullptr;
  const NoiseSchedule* schedule = nullptr;
};

struct SampleMeta {
  /// Stable id; also selects the per-sample random streams.
  std::uint64_t id = 0;
  Distribution distribution = Distribution::kInD;
  /// Ground-truth InD label; required in oracle mode for InD samples.
  std::optional<int> truth_label;
};

struct DetectionRecord {
  std::uint64_t id = 0;
  Distribution distribution = Distribution::kInD;
  bool valid = false;
  std::string error;
  int label = -1;
  int t_stop = 0;
  std::string aes_fired;
  Image synthesis;
  /// Raw values of psnr, l2, logits_l1 and fsd between input and synthesis.
  std::map<MetricKind, double> metric_scores;
  double mls = 0.0;
  double ebo = 0.0;
  /// Orientation-normalized score of the configured metric.
  double ood_score = 0.0;
  AesTrace aes_trace;
};

int predict_label(const Classifier* clf, const Image& x, LabelSource source,
                  const SampleMeta* meta, const RngStream& root);

/// max_c logits_c (higher = more InD).
double mls_from_logits(std::span<const double> logits);
/// -T log sum_c exp(logits_c / T) (higher = more OOD).
double ebo_from_logits(std::span<const double> logits, double temperature = 1.0);
double mls_score(const Classifier& clf, const Image& x);
double ebo_score(const Classifier& clf, const Image& x, double temperature = 1.0);

/// Label prediction, inversion (early-stopped where configured), guided
/// synthesis from the stopping latent down the same tau, and scoring.
/// Failures produce a record with valid = false.
DetectionRecord diffguard_score(const DetectorConfig& config, const Models& models,
                                const Image& x, const SampleMeta& meta);

std::vector<DetectionRecord> detect_all(const DetectorConfig& config, const Models& models,
                                        std::span<const Image> images,
                                        std::span<const SampleMeta> metas);

enum class Baseline { kMls, kEbo };
std::string_view baseline_name(Baseline baseline);
std::optional<Baseline> parse_baseline(std::string_view name);

/// Baseline score oriented so that larger means more OOD (-MLS or energy).
double baseline_ood_score(Baseline baseline, double mls, double ebo);

struct TandemConfig {
  Baseline baseline = Baseline::kEbo;
  double low_quantile = 0.05;
  double high_quantile = 0.95;
  /// Band edges in the OOD-oriented baseline scale; set by calibrate_tandem.
  std::optional<double> low;
  std::optional<double> high;
  void validate() const;
  bool calibrated() const { return low.has_value() && high.has_value(); }
  friend bool operator==(const TandemConfig&, const TandemConfig&) = default;
};

/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Sets low/high from the OOD-oriented baseline scores of InD validation
/// samples.
TandemConfig calibrate_tandem(const TandemConfig& config,
                              std::span<const double> ind_baseline_scores);

/// Below the band: -2 + m(b - low). Inside: m(d). Above: 2 + m(b - high).
/// m(z) = z / (1 + |z|) maps onto (-1, 1), so the three regimes stay
/// ordered and each keeps its own ranking.
double tandem_combine(double baseline_score, double diffguard_score, const TandemConfig& config);

}  // namespace semguard

#endif  // SEMGUARD_DETECTION_HPP_
