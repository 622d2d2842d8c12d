// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_GUIDANCE_HPP_
#define SEMGUARD_GUIDANCE_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "semguard/diffusion.hpp"
#include "semguard/image.hpp"
#include "semguard/nn.hpp"
#include "semguard/rng.hpp"

namespace semguard {

enum class GuidanceMode { kClassifier, kClassifierFree };
std::string_view guidance_mode_name(GuidanceMode mode);
std::optional<GuidanceMode> parse_guidance_mode(std::string_view name);

/// How d x0_hat / d x_t is handled when the classifier gradient is taken at
/// the clean estimate.
enum class ChainRule {
  /// Differentiate through estimate_x0 including the score network.
  kFull,
  /// Treat the Jacobian as the scalar 1 / sqrt(alpha_t).
  kScaledIdentity,
};
std::string_view chain_rule_name(ChainRule rule);
std::optional<ChainRule> parse_chain_rule(std::string_view name);

struct CutoutSpec {
  double hole_side_fraction = 0.25;
  int holes_per_aug = 1;
  double fill_value = 0.0;
  friend bool operator==(const CutoutSpec&, const CutoutSpec&) = default;
};

struct GuidanceConfig {
  GuidanceMode mode = GuidanceMode::kClassifier;
  /// Classifier-guidance scale s.
  double scale = 5.0;
  /// Classifier-free scale omega.
  double omega = 3.0;
  /// -1 moves the noise prediction against grad log p (the synthesis
  /// climbs p(y | x)); +1 adds the gradient instead.
  double gradient_sign = -1.0;
  CutoutSpec cutout;
  /// Number of accumulated cutout gradients K.
  int n_aug = 4;
  ChainRule chain_rule = ChainRule::kScaledIdentity;
  /// Take the classifier gradient at x0_hat(x_t) rather than at x_t.
  bool use_xhat0 = true;
  /// Apply cutout augmentation to the classifier input.
  bool use_cutout = true;
  double cam_cutpoint = 0.2;
  void validate() const;
  friend bool operator==(const GuidanceConfig&, const GuidanceConfig&) = default;
};

/// eps + sign * s * sqrt(1 - alpha_t) * grad_log_p.
Image classifier_guided_eps(const Image& eps, const Image& grad_log_p, double scale, int t,
                            const NoiseSchedule& schedule, double gradient_sign = -1.0);

/// Binary keep-mask (1 = kept, 0 = hole) with the image's spatial shape
/// and one channel.
struct CutoutMask {
  Image keep;
};

/// Square holes of side round(fraction * side) (at least 1 px) placed
/// uniformly where they fit entirely inside the image.
CutoutMask draw_cutout(const CutoutSpec& spec, int height, int width, RngStream& rng);
Image apply_cutout(const Image& x, const CutoutMask& mask, double fill_value);
Image cutout(const Image& x, const CutoutSpec& spec, RngStream& rng);

/// Clean Grad with explicit, frozen cutout masks: the mean over masks of
/// grad_{x_t} log p(y | cutout_k(input(x_t))), where input is x0_hat(x_t)
/// (or x_t itself when use_xhat0 is off). An empty mask list means no
/// augmentation. `eps` is the unconditional prediction at (x_t, t).
Image clean_grad_with_masks(const Classifier& clf, const ScoreNetwork& net, const Image& x_t,
                            int t, int y, const Image& eps, const NoiseSchedule& schedule,
                            const GuidanceConfig& config, std::span<const CutoutMask> masks);

/// Draws n_aug masks from `rng` (none when use_cutout is off) and evaluates
/// clean_grad_with_masks.
Image clean_grad(const Classifier& clf, const ScoreNetwork& net, const Image& x_t, int t, int y,
                 const Image& eps, const NoiseSchedule& schedule, const GuidanceConfig& config,
                 RngStream& rng);

/// eps_null + omega * (eps_cond - eps_null).
Image cfg_combine(const Image& eps_null, const Image& eps_cond, double omega);
Image cfg_eps(const ScoreNetwork& net, const Image& x_t, int t, int y, double omega);

struct CamMask {
  /// One channel, values in {0, 1}.
  Image mask;
};

/// 1 where grad_cam(x0, y) >= cutpoint, else 0.
CamMask cam_mask(const Classifier& clf, const Image& x0, int y, double cutpoint);
CamMask threshold_cam(const Image& cam, double cutpoint);

/// Pixels under the mask take the classifier-free prediction, the rest the
/// unconditional one. Each output value is copied from one of the branches.
Image dsg_combine(const Image& eps_null, const Image& eps_cond, double omega,
                  const CamMask& mask);
Image dsg_eps(const ScoreNetwork& net, const Image& x_t, int t, int y, double omega,
              const CamMask& mask);

}  // namespace semguard

#endif  // SEMGUARD_GUIDANCE_HPP_
