// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/aes.hpp"

#include <cmath>
#include <sstream>

#include "semguard/errors.hpp"

namespace semguard {

void AesConfig::validate() const {
  if (criteria.empty()) throw ConfigError("AES needs at least one metric");
  for (const AesCriterion& c : criteria) {
    if (c.metric != MetricKind::kPsnr && c.metric != MetricKind::kFsd) {
      throw ConfigError("AES metric must be psnr or fsd, got '" +
                        std::string(metric_name(c.metric)) + "'");
    }
    if (!std::isfinite(c.threshold)) throw ConfigError("AES thresholds must be finite");
  }
  if (t_max && *t_max < 1) throw ConfigError("AES t_max must be >= 1");
}

int AesConfig::resolved_t_max(const NoiseSchedule& schedule) const {
  if (t_max) return std::min(*t_max, schedule.total_steps());
  return static_cast<int>(std::lround(0.6 * schedule.total_steps()));
}

bool criterion_crossed(const AesCriterion& criterion, double value) {
  return criterion.metric == MetricKind::kPsnr ? value < criterion.threshold
                                               : value > criterion.threshold;
}

double degradation_value(const Image& x0, const Image& xhat0_t, MetricKind metric,
                         const Classifier* clf, const FsdConfig& fsd_config) {
  switch (metric) {
    case MetricKind::kPsnr: return psnr(x0, xhat0_t);
    case MetricKind::kFsd:
      if (clf == nullptr) throw ArgumentError("FSD degradation needs a classifier");
      return fsd(*clf, x0, xhat0_t, fsd_config);
    default: throw ArgumentError("AES metric must be psnr or fsd");
  }
}

StopDecision should_stop(const std::vector<AesStep>& trace, const AesConfig& config,
                         int t_max) {
  if (trace.empty()) throw ArgumentError("should_stop: empty trace");
  const AesStep& last = trace.back();
  std::string fired;
  int crossed = 0;
  for (const AesCriterion& c : config.criteria) {
    auto it = last.values.find(c.metric);
    if (it == last.values.end()) throw ArgumentError("should_stop: metric not recorded");
    if (criterion_crossed(c, it->second)) {
      ++crossed;
      if (!fired.empty()) fired += '+';
      fired += metric_name(c.metric);
    }
  }
  const bool hit = config.combine == AesCombine::kAny
                       ? crossed > 0
                       : crossed == static_cast<int>(config.criteria.size());
  if (hit) return {true, fired};
  if (last.t >= t_max) return {true, "none"};
  return {false, ""};
}

std::vector<int> truncate_tau(const std::vector<int>& tau, int t_max) {
  std::vector<int> out;
  for (int t : tau) {
    if (t <= t_max) out.push_back(t);
  }
  return out;
}

AesResult invert_with_aes(const Image& x0, const NoisePredictor& predictor,
                          const NoiseSchedule& schedule, const std::vector<int>& tau,
                          const AesConfig& config, const Classifier* clf,
                          const FsdConfig& fsd_config, const GuidanceFn& guidance) {
  config.validate();
  const int t_max = config.resolved_t_max(schedule);
  const std::vector<int> steps = truncate_tau(tau, t_max);
  if (steps.empty()) throw ConfigError("AES t_max lies below the first element of tau");

  bool need_fsd = false;
  for (const AesCriterion& c : config.criteria) need_fsd |= c.metric == MetricKind::kFsd;
  if (need_fsd && clf == nullptr) throw ArgumentError("FSD monitoring needs a classifier");
  std::vector<FeatureMap> x0_features;
  if (need_fsd) x0_features = fsd_features(*clf, x0, fsd_config);

  AesResult result;
  InversionOptions options;
  options.track_xhat0 = true;
  options.guidance = guidance;
  options.stop = [&](std::vector<TrajectoryPoint>& points) {
    TrajectoryPoint& p = points.back();
    AesStep step;
    step.t = p.t;
    for (const AesCriterion& c : config.criteria) {
      if (step.values.count(c.metric)) continue;
      const double v = c.metric == MetricKind::kPsnr
                           ? psnr(x0, *p.xhat0)
                           : fsd_from_features(x0_features, fsd_features(*clf, *p.xhat0, fsd_config),
                                               fsd_config);
      step.values[c.metric] = v;
      p.quality[std::string(metric_name(c.metric))] = v;
    }
    result.trace.steps.push_back(std::move(step));
    const StopDecision d = should_stop(result.trace.steps, config, t_max);
    if (d.stop) result.trace.fired = d.fired;
    return d.stop;
  };
  std::vector<TrajectoryPoint> points = invert_trajectory(x0, predictor, schedule, steps, options);
  result.latent = std::move(points.back().x_t);
  result.trace.t_stop = points.back().t;
  // Only reachable when the last truncated step is below t_max.
  if (result.trace.fired.empty()) result.trace.fired = "none";
  return result;
}

std::string aes_trace_csv(const AesTrace& trace) {
  std::ostringstream out;
  out.precision(10);
  out << "t,psnr,fsd,fired\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const AesStep& s = trace.steps[i];
    out << s.t << ',';
    if (auto it = s.values.find(MetricKind::kPsnr); it != s.values.end()) out << it->second;
    out << ',';
    if (auto it = s.values.find(MetricKind::kFsd); it != s.values.end()) out << it->second;
    out << ',';
    if (i + 1 == trace.steps.size()) out << trace.fired;
    out << '\n';
  }
  return out.str();
}

}  // namespace semguard
