// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/detection.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>

#include "semguard/errors.hpp"

namespace semguard {

std::string_view label_source_name(LabelSource source) {
  return source == LabelSource::kClassifier ? "classifier" : "oracle";
}

std::optional<LabelSource> parse_label_source(std::string_view name) {
  if (name == "classifier") return LabelSource::kClassifier;
  if (name == "oracle") return LabelSource::kOracle;
  return std::nullopt;
}

int DetectorConfig::resolved_tau_length() const {
  if (tau_length) return *tau_length;
  return guidance.mode == GuidanceMode::kClassifier ? 50 : 25;
}

bool DetectorConfig::aes_active() const {
  return aes_enabled && (guidance.mode == GuidanceMode::kClassifier || aes_on_cfg);
}

void DetectorConfig::validate() const {
  guidance.validate();
  if (!sampler.deterministic()) throw ConfigError("detection requires eta = 0");
  if (tau_length && *tau_length < 1) throw ConfigError("tau_length must be >= 1");
  if (aes_active()) aes.validate();
  fsd.validate();
  if (!(ebo_temperature > 0.0)) throw ConfigError("EBO temperature must be > 0");
}

int predict_label(const Classifier* clf, const Image& x, LabelSource source,
                  const SampleMeta* meta, const RngStream& root) {
  if (source == LabelSource::kClassifier) {
    if (clf == nullptr) throw ArgumentError("classifier labels need a classifier");
    return argmax(clf->logits(x));
  }
  if (meta == nullptr) throw ArgumentError("oracle labels need ground-truth metadata");
  if (meta->distribution == Distribution::kInD) {
    if (!meta->truth_label) throw ArgumentError("oracle labels need the InD ground truth");
    return *meta->truth_label;
  }
  if (clf == nullptr) throw ArgumentError("oracle labels for OOD need the class count");
  RngStream rng = root.split("oracle", meta->id);
  return rng.next_index(clf->num_classes());
}

double mls_from_logits(std::span<const double> logits) {
  if (logits.empty()) throw ArgumentError("empty logits");
  return *std::max_element(logits.begin(), logits.end());
}

double ebo_from_logits(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw ArgumentError("EBO temperature must be > 0");
  if (logits.empty()) throw ArgumentError("empty logits");
  const double m = *std::max_element(logits.begin(), logits.end()) / temperature;
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l / temperature - m);
  return -temperature * (m + std::log(sum));
}

double mls_score(const Classifier& clf, const Image& x) { return mls_from_logits(clf.logits(x)); }

double ebo_score(const Classifier& clf, const Image& x, double temperature) {
  return ebo_from_logits(clf.logits(x), temperature);
}

namespace {

void fill_scores(DetectionRecord& rec, const DetectorConfig& config, const Classifier* clf,
                 const Image& x) {
  rec.metric_scores[MetricKind::kPsnr] = psnr(x, rec.synthesis);
  rec.metric_scores[MetricKind::kL2] = l2(x, rec.synthesis);
  if (clf != nullptr) {
    rec.metric_scores[MetricKind::kLogitsL1] = logits_l1(*clf, x, rec.synthesis);
    rec.metric_scores[MetricKind::kFsd] = fsd(*clf, x, rec.synthesis, config.fsd);
    const std::vector<double> logits = clf->logits(x);
    rec.mls = mls_from_logits(logits);
    rec.ebo = ebo_from_logits(logits, config.ebo_temperature);
  }
  auto it = rec.metric_scores.find(config.metric);
  if (it == rec.metric_scores.end()) throw ArgumentError("configured metric needs a classifier");
  rec.ood_score = orient_as_ood_score(config.metric, it->second);
  if (!std::isfinite(rec.ood_score)) throw NumericalError("non-finite detection score");
}

}  // namespace

DetectionRecord diffguard_score(const DetectorConfig& config, const Models& models,
                                const Image& x, const SampleMeta& meta) {
  DetectionRecord rec;
  rec.id = meta.id;
  rec.distribution = meta.distribution;
  try {
    config.validate();
    if (models.score == nullptr || models.schedule == nullptr) {
      throw ArgumentError("detection needs a score network and a schedule");
    }
    const ScoreNetwork& net = *models.score;
    const NoiseSchedule& schedule = *models.schedule;
    const Classifier* clf = models.classifier;
    const bool classifier_path = config.guidance.mode == GuidanceMode::kClassifier;
    if (clf == nullptr && (classifier_path || config.use_dsg)) {
      throw ArgumentError("this guidance mode needs a classifier");
    }
    if (!classifier_path && !net.conditional()) {
      throw ArgumentError("classifier-free guidance needs a conditional score network");
    }
    const RngStream root(config.seed);
    rec.label = predict_label(clf, x, config.label_source, &meta, root);

    const std::vector<int> tau = make_tau(schedule.total_steps(), config.resolved_tau_length());
    const NoisePredictor predictor = net.predictor(kNullLabel);

    Image latent;
    if (config.aes_active()) {
      AesResult r = invert_with_aes(x, predictor, schedule, tau, config.aes, clf, config.fsd);
      latent = std::move(r.latent);
      rec.t_stop = r.trace.t_stop;
      rec.aes_fired = r.trace.fired;
      rec.aes_trace = std::move(r.trace);
    } else {
      std::vector<TrajectoryPoint> pts = invert_trajectory(x, predictor, schedule, tau);
      latent = std::move(pts.back().x_t);
      rec.t_stop = pts.back().t;
    }

    const int y = rec.label;
    GuidanceFn guide;
    if (classifier_path) {
      auto rng = std::make_shared<RngStream>(root.split("cutout", meta.id));
      guide = [&, rng, y](const Image& x_t, int t, const Image& eps) {
        const Image g = clean_grad(*clf, net, x_t, t, y, eps, schedule, config.guidance, *rng);
        return classifier_guided_eps(eps, g, config.guidance.scale, t, schedule,
                                     config.guidance.gradient_sign);
      };
    } else if (config.use_dsg) {
      const CamMask mask = cam_mask(*clf, x, y, config.guidance.cam_cutpoint);
      guide = [&, mask, y](const Image& x_t, int t, const Image& eps) {
        return dsg_combine(eps, net.eval(x_t, t, y), config.guidance.omega, mask);
      };
    } else {
      guide = [&, y](const Image& x_t, int t, const Image& eps) {
        return cfg_combine(eps, net.eval(x_t, t, y), config.guidance.omega);
      };
    }
    rec.synthesis = sample_trajectory(latent, rec.t_stop, predictor, schedule, tau, guide);
    fill_scores(rec, config, clf, x);
    rec.valid = true;
  } catch (const std::exception& e) {
    rec.valid = false;
    rec.error = e.what();
  }
  return rec;
}

std::vector<DetectionRecord> detect_all(const DetectorConfig& config, const Models& models,
                                        std::span<const Image> images,
                                        std::span<const SampleMeta> metas) {
  if (images.size() != metas.size()) throw ArgumentError("detect_all: size mismatch");
  std::vector<DetectionRecord> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(diffguard_score(config, models, images[i], metas[i]));
  }
  return out;
}

std::string_view baseline_name(Baseline baseline) {
  return baseline == Baseline::kMls ? "mls" : "ebo";
}

std::optional<Baseline> parse_baseline(std::string_view name) {
  if (name == "mls") return Baseline::kMls;
  if (name == "ebo") return Baseline::kEbo;
  return std::nullopt;
}

double baseline_ood_score(Baseline baseline, double mls, double ebo) {
  return baseline == Baseline::kMls ? -mls : ebo;
}

void TandemConfig::validate() const {
  if (!(low_quantile >= 0.0 && low_quantile < high_quantile && high_quantile <= 1.0)) {
    throw ConfigError("tandem quantiles must satisfy 0 <= low < high <= 1");
  }
  if (calibrated() && !(*low < *high)) throw ConfigError("tandem band must satisfy low < high");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ArgumentError("quantile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

TandemConfig calibrate_tandem(const TandemConfig& config,
                              std::span<const double> ind_baseline_scores) {
  TandemConfig out = config;
  out.low.reset();
  out.high.reset();
  out.validate();
  const std::vector<double> v(ind_baseline_scores.begin(), ind_baseline_scores.end());
  out.low = quantile(v, config.low_quantile);
  out.high = quantile(v, config.high_quantile);
  if (!(*out.low < *out.high)) throw ConfigError("tandem band collapsed: baseline scores are constant");
  return out;
}

double tandem_combine(double baseline_score, double diffguard_score, const TandemConfig& config) {
  if (!config.calibrated()) throw ConfigError("tandem band is not calibrated");
  const auto squash = [](double z) { return z / (1.0 + std::abs(z)); };
  if (baseline_score < *config.low) return -2.0 + squash(baseline_score - *config.low);
  if (baseline_score > *config.high) return 2.0 + squash(baseline_score - *config.high);
  return squash(diffguard_score);
}

}  // namespace semguard
