// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_AES_HPP_
#define SEMGUARD_AES_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semguard/diffusion.hpp"
#include "semguard/image.hpp"
#include "semguard/nn.hpp"
#include "semguard/similarity.hpp"

namespace semguard {

/// One monitored metric. PSNR crosses when it falls below the threshold,
/// FSD when it rises above it.
struct AesCriterion {
  MetricKind metric = MetricKind::kPsnr;
  double threshold = 0.0;
  friend bool operator==(const AesCriterion&, const AesCriterion&) = default;
};

enum class AesCombine { kAny, kAll };

struct AesConfig {
  std::vector<AesCriterion> criteria;
  AesCombine combine = AesCombine::kAny;
  /// Latest allowed stopping timestep; nullopt means round(3/5 * T).
  std::optional<int> t_max;
  void validate() const;
  int resolved_t_max(const NoiseSchedule& schedule) const;
  friend bool operator==(const AesConfig&, const AesConfig&) = default;
};

struct AesStep {
  int t = 0;
  std::map<MetricKind, double> values;
};

struct AesTrace {
  std::vector<AesStep> steps;
  int t_stop = 0;
  /// "psnr", "fsd", "psnr+fsd", or "none" when t_max was reached.
  std::string fired;
};

struct StopDecision {
  bool stop = false;
  std::string fired;
};

bool criterion_crossed(const AesCriterion& criterion, double value);

/// Degradation of the clean estimate relative to the input. PSNR in dB
/// (lower = worse), FSD as a distance (higher = worse).
double degradation_value(const Image& x0, const Image& xhat0_t, MetricKind metric,
                         const Classifier* clf, const FsdConfig& fsd_config = {});

/// Evaluated at the latest recorded step.
StopDecision should_stop(const std::vector<AesStep>& trace, const AesConfig& config,
                         int t_max);

struct AesResult {
  Image latent;
  AesTrace trace;
};

/// Inverts along the elements of tau up to t_max, scoring x0_hat(x_t)
/// against x0 after every step, and halts at the first step where
/// should_stop fires. `clf` is required when FSD is monitored.
AesResult invert_with_aes(const Image& x0, const NoisePredictor& predictor,
                          const NoiseSchedule& schedule, const std::vector<int>& tau,
                          const AesConfig& config, const Classifier* clf,
                          const FsdConfig& fsd_config = {}, const GuidanceFn& guidance = {});

/// Elements of tau no larger than t_max.
std::vector<int> truncate_tau(const std::vector<int>& tau, int t_max);

/// Columns t, psnr, fsd, fired (fired is set on the final row only).
std::string aes_trace_csv(const AesTrace& trace);

}  // namespace semguard

#endif  // SEMGUARD_AES_HPP_
