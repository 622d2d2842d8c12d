// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_SIMILARITY_HPP_
#define SEMGUARD_SIMILARITY_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/image.hpp"
#include "semguard/nn.hpp"

namespace semguard {

/// Stable CLI tokens: psnr, l2, logits_l1, fsd.
enum class MetricKind { kPsnr, kL2, kLogitsL1, kFsd };

std::string_view metric_name(MetricKind kind);
std::optional<MetricKind> parse_metric(std::string_view name);
/// True only for PSNR.
bool larger_is_more_similar(MetricKind kind);

inline constexpr double kPsnrCap = 99.0;

/// Feature structure distance: a DISTS-style structure/texture comparison
/// over per-channel spatial statistics. "pixels" is the raw image; other
/// names are classifier layers.
struct FsdConfig {
  std::vector<std::string> layers = {"pixels", "block1", "block2", "block3"};
  double c1 = 1e-6;
  double c2 = 1e-6;
  void validate() const;
  friend bool operator==(const FsdConfig&, const FsdConfig&) = default;
};

/// 10 log10(1 / MSE) for [0, 1] images, capped at 99 dB.
double psnr(const Image& a, const Image& b);
/// Root-mean-square pixel difference.
double l2(const Image& a, const Image& b);
/// sum_c |logits(a)_c - logits(b)_c|.
double logits_l1(const Classifier& clf, const Image& a, const Image& b);

/// 1 - mean over (layer, channel) of
///   (2 mu_a mu_b + c1) / (mu_a^2 + mu_b^2 + c1) *
///   (2 cov_ab + c2) / (var_a + var_b + c2).
double fsd(const Classifier& clf, const Image& a, const Image& b, const FsdConfig& config = {});

/// Same statistic on precomputed feature maps (layer-aligned).
double fsd_from_features(const std::vector<FeatureMap>& a, const std::vector<FeatureMap>& b,
                         const FsdConfig& config);
/// Pixels plus the configured classifier layers, in config order.
std::vector<FeatureMap> fsd_features(const Classifier& clf, const Image& x,
                                     const FsdConfig& config);

/// Raw metric value in its natural orientation. `clf` may be null for
/// pixel-only metrics.
double metric_value(MetricKind kind, const Classifier* clf, const Image& a, const Image& b,
                    const FsdConfig& fsd_config = {});

/// Orientation-normalized score: larger always means more OOD (PSNR is
/// negated, the distances pass through).
double ood_score(MetricKind kind, const Classifier* clf, const Image& input,
                 const Image& synthesis, const FsdConfig& fsd_config = {});
double orient_as_ood_score(MetricKind kind, double raw_value);

}  // namespace semguard

#endif  // SEMGUARD_SIMILARITY_HPP_
