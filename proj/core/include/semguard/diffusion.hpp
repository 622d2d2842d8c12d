// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_DIFFUSION_HPP_
#define SEMGUARD_DIFFUSION_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/image.hpp"

namespace semguard {

enum class ScheduleKind {
  /// Per-step beta linear in t, with endpoints 1e-4 and 0.02 rescaled by
  /// 1000 / T so that short chains still reach a near-pure-noise latent.
  kLinear,
  /// Squared-cosine cumulative schedule.
  kCosine,
};

std::string_view schedule_kind_name(ScheduleKind kind);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);

/// Cumulative signal coefficients alpha_1..alpha_T (strictly decreasing, in
/// (0, 1]) plus the boundary alpha_0 = 1.
class NoiseSchedule {
 public:
  NoiseSchedule(int total_steps, std::vector<double> alpha_with_zero);
  int total_steps() const { return total_steps_; }
  /// alpha_t for t in [0, T]; throws ArgumentError otherwise.
  double alpha(int t) const;
  const std::vector<double>& alphas() const { return alpha_; }

 private:
  int total_steps_;
  std::vector<double> alpha_;
};

NoiseSchedule make_schedule(int total_steps, ScheduleKind kind = ScheduleKind::kLinear);

/// Strictly increasing sub-sequence of [1, T] with uniform stride, ending at
/// T: tau_i = ceil(i * T / length) for i = 1..length.
std::vector<int> make_tau(int total_steps, int length);

struct SamplerConfig {
  /// sigma_t = eta * sqrt((1 - a_prev) / (1 - a_t)) * sqrt(1 - a_t / a_prev).
  /// Zero gives the deterministic sampler required for inversion.
  double eta = 0.0;
  bool deterministic() const { return eta == 0.0; }
  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;
};

struct TrajectoryPoint {
  int t = 0;
  Image x_t;
  std::optional<Image> xhat0;
  std::map<std::string, double> quality;
};

/// eps_theta(x_t, t) with any conditioning already bound.
using NoisePredictor = std::function<Image(const Image& x_t, int t)>;
/// Maps an unguided noise prediction at (x_t, t) to the guided one.
using GuidanceFn = std::function<Image(const Image& x_t, int t, const Image& eps)>;

/// Closed-form marginal x_t = sqrt(a_t) x0 + sqrt(1 - a_t) noise.
Image forward_diffuse(const Image& x0, int t, const NoiseSchedule& schedule,
                      const Image& noise);

/// One Markov kernel q(x_t | x_{t-1}).
Image forward_step(const Image& x_prev, int t, const NoiseSchedule& schedule,
                   const Image& noise);

/// x0_hat = (x_t - sqrt(1 - a_t) eps) / sqrt(a_t).
Image estimate_x0(const Image& x_t, const Image& eps, int t, const NoiseSchedule& schedule);

/// Shared DDIM kernel on raw coefficients:
/// sqrt(a') x0_hat + sqrt(1 - a' - sigma^2) eps + sigma * noise, with
/// x0_hat = (x - sqrt(1 - a) eps) / sqrt(a). a' = a leaves x unchanged.
Image ddim_transition(const Image& x_t, const Image& eps_hat, double alpha_t, double alpha_target,
                      double sigma = 0.0, const Image* noise = nullptr);

double ddim_sigma(int t, int t_prev, const NoiseSchedule& schedule, double eta);

/// Generalized DDIM update from t down to t_prev. `noise` is required when
/// the configured sigma is nonzero.
Image ddim_denoise_step(const Image& x_t, const Image& eps_hat, int t, int t_prev,
                        const NoiseSchedule& schedule, const SamplerConfig& config = {},
                        const Image* noise = nullptr);

/// Deterministic DDIM inversion step from t up to t_next.
Image ddim_invert_step(const Image& x_t, const Image& eps_hat, int t, int t_next,
                       const NoiseSchedule& schedule, const SamplerConfig& config = {});

struct InversionOptions {
  /// Called after each new point; returning true ends the inversion there.
  std::function<bool(std::vector<TrajectoryPoint>&)> stop;
  /// Record x0_hat(x_t) = estimate_x0(x_t, eps(x_t, t), t) for every point.
  bool track_xhat0 = false;
  /// Optional guidance applied to the inversion noise prediction.
  GuidanceFn guidance;
  SamplerConfig sampler;
};

/// Runs the inversion 0 -> tau[0] -> tau[1] -> ... . The noise for the step
/// t -> t_next is predicted as eps(x_t, t), except for the first step, which
/// uses eps(x_0, tau[0]). Points are returned in increasing t; the last
/// point holds the latent.
std::vector<TrajectoryPoint> invert_trajectory(const Image& x0, const NoisePredictor& predictor,
                                               const NoiseSchedule& schedule,
                                               const std::vector<int>& tau,
                                               const InversionOptions& options = {});

/// Denoises from (x_start, t_start) down the elements of tau below t_start
/// and finally to t = 0. `guidance` may be empty (unguided).
Image sample_trajectory(const Image& x_start, int t_start, const NoisePredictor& predictor,
                        const NoiseSchedule& schedule, const std::vector<int>& tau,
                        const GuidanceFn& guidance = {});

/// CSV with columns t followed by the sorted quality keys.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& points);

}  // namespace semguard

#endif  // SEMGUARD_DIFFUSION_HPP_
