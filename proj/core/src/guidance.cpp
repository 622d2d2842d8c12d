// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "semguard/errors.hpp"

namespace semguard {

std::string_view guidance_mode_name(GuidanceMode mode) {
  return mode == GuidanceMode::kClassifier ? "classifier" : "classifier_free";
}

std::optional<GuidanceMode> parse_guidance_mode(std::string_view name) {
  if (name == "classifier") return GuidanceMode::kClassifier;
  if (name == "classifier_free") return GuidanceMode::kClassifierFree;
  return std::nullopt;
}

std::string_view chain_rule_name(ChainRule rule) {
  return rule == ChainRule::kFull ? "full" : "scaled_identity";
}

std::optional<ChainRule> parse_chain_rule(std::string_view name) {
  if (name == "full") return ChainRule::kFull;
  if (name == "scaled_identity") return ChainRule::kScaledIdentity;
  return std::nullopt;
}

void GuidanceConfig::validate() const {
  if (!(scale >= 0.0) || !(omega >= 0.0)) throw ConfigError("guidance scales must be >= 0");
  if (gradient_sign != 1.0 && gradient_sign != -1.0) {
    throw ConfigError("guidance gradient sign must be +1 or -1");
  }
  if (!(cam_cutpoint >= 0.0 && cam_cutpoint <= 1.0)) {
    throw ConfigError("cam_cutpoint must lie in [0, 1]");
  }
  if (n_aug < 1) throw ConfigError("n_aug must be >= 1");
  if (!(cutout.hole_side_fraction > 0.0 && cutout.hole_side_fraction <= 1.0) ||
      cutout.holes_per_aug < 0) {
    throw ConfigError("cutout holes must fit inside the image");
  }
}

Image classifier_guided_eps(const Image& eps, const Image& grad_log_p, double scale, int t,
                            const NoiseSchedule& schedule, double gradient_sign) {
  return linear_combination(
      1.0, eps, gradient_sign * scale * std::sqrt(1.0 - schedule.alpha(t)), grad_log_p);
}

CutoutMask draw_cutout(const CutoutSpec& spec, int height, int width, RngStream& rng) {
  CutoutMask m{Image(1, height, width, 1.0)};
  const int side = std::clamp(
      static_cast<int>(std::lround(spec.hole_side_fraction * std::min(height, width))), 1,
      std::min(height, width));
  for (int k = 0; k < spec.holes_per_aug; ++k) {
    const int y0 = rng.next_index(height - side + 1);
    const int x0 = rng.next_index(width - side + 1);
    for (int y = y0; y < y0 + side; ++y) {
      for (int x = x0; x < x0 + side; ++x) m.keep.at(0, y, x) = 0.0;
    }
  }
  return m;
}

Image apply_cutout(const Image& x, const CutoutMask& mask, double fill_value) {
  if (mask.keep.height() != x.height() || mask.keep.width() != x.width()) {
    throw ArgumentError("cutout mask shape mismatch");
  }
  Image out = x;
  for (int c = 0; c < x.channels(); ++c) {
    for (int y = 0; y < x.height(); ++y) {
      for (int xx = 0; xx < x.width(); ++xx) {
        if (mask.keep.at(0, y, xx) == 0.0) out.at(c, y, xx) = fill_value;
      }
    }
  }
  return out;
}

Image cutout(const Image& x, const CutoutSpec& spec, RngStream& rng) {
  return apply_cutout(x, draw_cutout(spec, x.height(), x.width(), rng), spec.fill_value);
}

Image clean_grad_with_masks(const Classifier& clf, const ScoreNetwork& net, const Image& x_t,
                            int t, int y, const Image& eps, const NoiseSchedule& schedule,
                            const GuidanceConfig& config, std::span<const CutoutMask> masks) {
  const double alpha = schedule.alpha(t);
  const Image input = config.use_xhat0 ? estimate_x0(x_t, eps, t, schedule) : x_t;

  std::vector<Image> augmented;
  if (masks.empty()) {
    augmented.push_back(input);
  } else {
    for (const CutoutMask& m : masks) {
      augmented.push_back(apply_cutout(input, m, config.cutout.fill_value));
    }
  }
  std::vector<const Image*> ptrs;
  for (const Image& a : augmented) ptrs.push_back(&a);
  const std::vector<int> ys(ptrs.size(), y);
  std::vector<Image> grads = clf.input_log_prob_grad_batch(ptrs, ys);

  // d cutout / d input is the keep mask.
  Image grad(input.channels(), input.height(), input.width());
  for (std::size_t k = 0; k < grads.size(); ++k) {
    for (int c = 0; c < grad.channels(); ++c) {
      for (int yy = 0; yy < grad.height(); ++yy) {
        for (int xx = 0; xx < grad.width(); ++xx) {
          const double keep = masks.empty() ? 1.0 : masks[k].keep.at(0, yy, xx);
          grad.at(c, yy, xx) += keep * grads[k].at(c, yy, xx);
        }
      }
    }
  }
  grad *= 1.0 / static_cast<double>(grads.size());

  if (!config.use_xhat0) return grad;
  if (config.chain_rule == ChainRule::kScaledIdentity) return grad * (1.0 / std::sqrt(alpha));
  // x0_hat = (x_t - sqrt(1 - a) eps(x_t)) / sqrt(a)
  const Image jt = net.input_vjp(x_t, t, kNullLabel, grad);
  return linear_combination(1.0 / std::sqrt(alpha), grad,
                            -std::sqrt(1.0 - alpha) / std::sqrt(alpha), jt);
}

Image clean_grad(const Classifier& clf, const ScoreNetwork& net, const Image& x_t, int t, int y,
                 const Image& eps, const NoiseSchedule& schedule, const GuidanceConfig& config,
                 RngStream& rng) {
  std::vector<CutoutMask> masks;
  if (config.use_cutout && config.cutout.holes_per_aug > 0) {
    for (int k = 0; k < config.n_aug; ++k) {
      masks.push_back(draw_cutout(config.cutout, x_t.height(), x_t.width(), rng));
    }
  }
  return clean_grad_with_masks(clf, net, x_t, t, y, eps, schedule, config, masks);
}

Image cfg_combine(const Image& eps_null, const Image& eps_cond, double omega) {
  require_same_shape(eps_null, eps_cond, "cfg_combine");
  Image out = eps_null;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = eps_null[i] + omega * (eps_cond[i] - eps_null[i]);
  }
  return out;
}

Image cfg_eps(const ScoreNetwork& net, const Image& x_t, int t, int y, double omega) {
  const Image* xs[] = {&x_t, &x_t};
  const int ts[] = {t, t};
  const int ys[] = {kNullLabel, y};
  const std::vector<Image> eps = net.eval_batch(xs, ts, ys);
  return cfg_combine(eps[0], eps[1], omega);
}

CamMask threshold_cam(const Image& cam, double cutpoint) {
  CamMask m{Image(1, cam.height(), cam.width())};
  for (int y = 0; y < cam.height(); ++y) {
    for (int x = 0; x < cam.width(); ++x) {
      m.mask.at(0, y, x) = cam.at(0, y, x) >= cutpoint ? 1.0 : 0.0;
    }
  }
  return m;
}

CamMask cam_mask(const Classifier& clf, const Image& x0, int y, double cutpoint) {
  return threshold_cam(clf.grad_cam(x0, y), cutpoint);
}

Image dsg_combine(const Image& eps_null, const Image& eps_cond, double omega,
                  const CamMask& mask) {
  require_same_shape(eps_null, eps_cond, "dsg_combine");
  if (mask.mask.height() != eps_null.height() || mask.mask.width() != eps_null.width()) {
    throw ArgumentError("dsg: mask shape mismatch");
  }
  const Image guided = cfg_combine(eps_null, eps_cond, omega);
  Image out = eps_null;
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        if (mask.mask.at(0, y, x) != 0.0) out.at(c, y, x) = guided.at(c, y, x);
      }
    }
  }
  return out;
}

Image dsg_eps(const ScoreNetwork& net, const Image& x_t, int t, int y, double omega,
              const CamMask& mask) {
  const Image* xs[] = {&x_t, &x_t};
  const int ts[] = {t, t};
  const int ys[] = {kNullLabel, y};
  const std::vector<Image> eps = net.eval_batch(xs, ts, ys);
  return dsg_combine(eps[0], eps[1], omega, mask);
}

}  // namespace semguard
