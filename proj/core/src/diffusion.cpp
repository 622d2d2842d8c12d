// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "semguard/errors.hpp"

namespace semguard {

std::string_view schedule_kind_name(ScheduleKind kind) {
  return kind == ScheduleKind::kLinear ? "linear" : "cosine";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  if (name == "linear") return ScheduleKind::kLinear;
  if (name == "cosine") return ScheduleKind::kCosine;
  return std::nullopt;
}

NoiseSchedule::NoiseSchedule(int total_steps, std::vector<double> alpha_with_zero)
    : total_steps_(total_steps), alpha_(std::move(alpha_with_zero)) {
  if (total_steps < 2) throw ArgumentError("schedule needs T >= 2");
  if (alpha_.size() != static_cast<std::size_t>(total_steps) + 1) {
    throw ArgumentError("schedule needs T + 1 coefficients including alpha_0");
  }
  if (alpha_[0] != 1.0) throw ArgumentError("alpha_0 must be 1");
  for (int t = 1; t <= total_steps; ++t) {
    if (!(alpha_[t] > 0.0 && alpha_[t] <= 1.0)) {
      throw ArgumentError("alpha_" + std::to_string(t) + " outside (0, 1]");
    }
    if (t > 1 && !(alpha_[t] < alpha_[t - 1])) {
      throw ArgumentError("alpha must be strictly decreasing");
    }
  }
}

double NoiseSchedule::alpha(int t) const {
  if (t < 0 || t > total_steps_) {
    throw ArgumentError("timestep " + std::to_string(t) + " outside [0, " +
                        std::to_string(total_steps_) + "]");
  }
  return alpha_[t];
}

NoiseSchedule make_schedule(int total_steps, ScheduleKind kind) {
  if (total_steps < 2) throw ArgumentError("make_schedule: T must be >= 2");
  std::vector<double> alpha(total_steps + 1, 1.0);
  if (kind == ScheduleKind::kLinear) {
    const double scale = 1000.0 / total_steps;
    const double beta_start = std::min(0.5, scale * 1e-4);
    const double beta_end = std::min(0.999, scale * 0.02);
    for (int t = 1; t <= total_steps; ++t) {
      const double beta =
          beta_start + (beta_end - beta_start) * (t - 1) / double(total_steps - 1);
      alpha[t] = alpha[t - 1] * (1.0 - beta);
    }
  } else {
    const double s = 0.008;
    auto f = [&](int t) {
      const double c = std::cos((t / double(total_steps) + s) / (1 + s) * std::numbers::pi / 2);
      return c * c;
    };
    for (int t = 1; t <= total_steps; ++t) {
      const double beta = std::min(0.999, 1.0 - f(t) / f(t - 1));
      alpha[t] = alpha[t - 1] * (1.0 - beta);
    }
  }
  return NoiseSchedule(total_steps, std::move(alpha));
}

std::vector<int> make_tau(int total_steps, int length) {
  if (length < 1 || length > total_steps) {
    throw ArgumentError("tau length must be in [1, T]");
  }
  std::vector<int> tau(length);
  for (int i = 1; i <= length; ++i) {
    tau[i - 1] = static_cast<int>((static_cast<long long>(i) * total_steps + length - 1) / length);
  }
  return tau;
}

Image forward_diffuse(const Image& x0, int t, const NoiseSchedule& schedule,
                      const Image& noise) {
  require_same_shape(x0, noise, "forward_diffuse");
  const double a = schedule.alpha(t);
  return linear_combination(std::sqrt(a), x0, std::sqrt(1.0 - a), noise);
}

Image forward_step(const Image& x_prev, int t, const NoiseSchedule& schedule,
                   const Image& noise) {
  require_same_shape(x_prev, noise, "forward_step");
  if (t < 1) throw ArgumentError("forward_step needs t >= 1");
  const double ratio = schedule.alpha(t) / schedule.alpha(t - 1);
  return linear_combination(std::sqrt(ratio), x_prev, std::sqrt(1.0 - ratio), noise);
}

Image estimate_x0(const Image& x_t, const Image& eps, int t, const NoiseSchedule& schedule) {
  require_same_shape(x_t, eps, "estimate_x0");
  const double a = schedule.alpha(t);
  return linear_combination(1.0 / std::sqrt(a), x_t, -std::sqrt(1.0 - a) / std::sqrt(a), eps);
}

double ddim_sigma(int t, int t_prev, const NoiseSchedule& schedule, double eta) {
  if (eta == 0.0) return 0.0;
  const double a = schedule.alpha(t), ap = schedule.alpha(t_prev);
  return eta * std::sqrt((1.0 - ap) / (1.0 - a)) * std::sqrt(1.0 - a / ap);
}

Image ddim_transition(const Image& x_t, const Image& eps_hat, double alpha_t, double alpha_target,
                      double sigma, const Image* noise) {
  require_same_shape(x_t, eps_hat, "ddim_transition");
  if (!(alpha_t > 0.0 && alpha_t <= 1.0 && alpha_target > 0.0 && alpha_target <= 1.0)) {
    throw ArgumentError("ddim_transition: alphas must lie in (0, 1]");
  }
  const double dir = 1.0 - alpha_target - sigma * sigma;
  if (dir < 0.0) throw ArgumentError("sigma_t^2 exceeds 1 - alpha_{t_prev}");
  const double ra = std::sqrt(alpha_t);
  const double rb = std::sqrt(1.0 - alpha_t);
  const double rt = std::sqrt(alpha_target);
  const double rd = std::sqrt(dir);
  Image out = x_t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0 = (x_t[i] - rb * eps_hat[i]) / ra;
    out[i] = rt * x0 + rd * eps_hat[i];
  }
  if (sigma != 0.0) {
    if (noise == nullptr) throw ArgumentError("stochastic DDIM step needs a noise image");
    require_same_shape(out, *noise, "ddim_transition");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += sigma * (*noise)[i];
  }
  return out;
}

Image ddim_denoise_step(const Image& x_t, const Image& eps_hat, int t, int t_prev,
                        const NoiseSchedule& schedule, const SamplerConfig& config,
                        const Image* noise) {
  if (!(t > t_prev && t_prev >= 0)) {
    throw ArgumentError("ddim_denoise_step requires t > t_prev >= 0");
  }
  const double sigma = ddim_sigma(t, t_prev, schedule, config.eta);
  return ddim_transition(x_t, eps_hat, schedule.alpha(t), schedule.alpha(t_prev), sigma, noise);
}

Image ddim_invert_step(const Image& x_t, const Image& eps_hat, int t, int t_next,
                       const NoiseSchedule& schedule, const SamplerConfig& config) {
  if (!config.deterministic()) {
    throw ArgumentError("DDIM inversion requires the deterministic sampler (eta = 0)");
  }
  if (!(t < t_next && t_next <= schedule.total_steps() && t >= 0)) {
    throw ArgumentError("ddim_invert_step requires 0 <= t < t_next <= T");
  }
  return ddim_transition(x_t, eps_hat, schedule.alpha(t), schedule.alpha(t_next));
}

std::vector<TrajectoryPoint> invert_trajectory(const Image& x0, const NoisePredictor& predictor,
                                               const NoiseSchedule& schedule,
                                               const std::vector<int>& tau,
                                               const InversionOptions& options) {
  if (!options.sampler.deterministic()) {
    throw ArgumentError("invert_trajectory requires the deterministic sampler");
  }
  if (tau.empty()) throw ArgumentError("invert_trajectory: empty tau");
  std::vector<TrajectoryPoint> points;
  Image x = x0;
  int t = 0;
  // The network is not defined at t = 0, so the first step uses tau[0].
  Image eps = predictor(x, tau.front());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const int t_next = tau[i];
    if (options.guidance) eps = options.guidance(x, t == 0 ? t_next : t, eps);
    x = ddim_invert_step(x, eps, t, t_next, schedule, options.sampler);
    t = t_next;
    const bool more = i + 1 < tau.size();
    if (more || options.track_xhat0) eps = predictor(x, t);
    TrajectoryPoint p;
    p.t = t;
    p.x_t = x;
    if (options.track_xhat0) p.xhat0 = estimate_x0(x, eps, t, schedule);
    points.push_back(std::move(p));
    if (options.stop && options.stop(points)) break;
  }
  return points;
}

Image sample_trajectory(const Image& x_start, int t_start, const NoisePredictor& predictor,
                        const NoiseSchedule& schedule, const std::vector<int>& tau,
                        const GuidanceFn& guidance) {
  const bool in_tau = std::find(tau.begin(), tau.end(), t_start) != tau.end();
  if (!in_tau && t_start != schedule.total_steps()) {
    throw ArgumentError("sample_trajectory: t_start must be an element of tau or T");
  }
  std::vector<int> steps;
  for (auto it = tau.rbegin(); it != tau.rend(); ++it) {
    if (*it < t_start) steps.push_back(*it);
  }
  steps.push_back(0);
  Image x = x_start;
  int t = t_start;
  for (int t_prev : steps) {
    Image eps = predictor(x, t);
    if (guidance) eps = guidance(x, t, eps);
    x = ddim_denoise_step(x, eps, t, t_prev, schedule);
    t = t_prev;
  }
  return x;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& points) {
  std::set<std::string> keys;
  for (const auto& p : points) {
    for (const auto& [k, v] : p.quality) keys.insert(k);
  }
  std::ostringstream out;
  out.precision(10);
  out << "t";
  for (const auto& k : keys) out << ',' << k;
  out << '\n';
  for (const auto& p : points) {
    out << p.t;
    for (const auto& k : keys) {
      auto it = p.quality.find(k);
      out << ',';
      if (it != p.quality.end()) out << it->second;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace semguard
