// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "semguard/errors.hpp"

namespace semguard {

std::string_view metric_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kPsnr: return "psnr";
    case MetricKind::kL2: return "l2";
    case MetricKind::kLogitsL1: return "logits_l1";
    case MetricKind::kFsd: return "fsd";
  }
  return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view name) {
  for (MetricKind k : {MetricKind::kPsnr, MetricKind::kL2, MetricKind::kLogitsL1,
                       MetricKind::kFsd}) {
    if (metric_name(k) == name) return k;
  }
  return std::nullopt;
}

bool larger_is_more_similar(MetricKind kind) { return kind == MetricKind::kPsnr; }

void FsdConfig::validate() const {
  if (layers.empty()) throw ConfigError("FSD needs at least one layer");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ConfigError("FSD constants must be positive");
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(a.size());
  if (mse < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double l2(const Image& a, const Image& b) {
  require_same_shape(a, b, "l2");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(a.size()));
}

double logits_l1(const Classifier& clf, const Image& a, const Image& b) {
  require_same_shape(a, b, "logits_l1");
  const Image* xs[] = {&a, &b};
  const auto logits = clf.logits_batch(xs);
  double sum = 0.0;
  for (int c = 0; c < clf.num_classes(); ++c) sum += std::abs(logits[0][c] - logits[1][c]);
  return sum;
}

std::vector<FeatureMap> fsd_features(const Classifier& clf, const Image& x,
                                     const FsdConfig& config) {
  std::vector<std::string> layer_names;
  for (const std::string& name : config.layers) {
    if (name != "pixels") layer_names.push_back(name);
  }
  std::vector<FeatureMap> layers =
      layer_names.empty() ? std::vector<FeatureMap>{} : clf.features(x, layer_names);
  std::vector<FeatureMap> out;
  std::size_t next = 0;
  for (const std::string& name : config.layers) {
    if (name == "pixels") {
      FeatureMap f{x.channels(), x.height(), x.width(), {}};
      f.values.assign(x.pixels().begin(), x.pixels().end());
      out.push_back(std::move(f));
    } else {
      out.push_back(std::move(layers[next++]));
    }
  }
  return out;
}

double fsd_from_features(const std::vector<FeatureMap>& a, const std::vector<FeatureMap>& b,
                         const FsdConfig& config) {
  if (a.size() != b.size()) throw ArgumentError("fsd: layer count mismatch");
  double total = 0.0;
  long terms = 0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const FeatureMap& fa = a[l];
    const FeatureMap& fb = b[l];
    if (fa.channels != fb.channels || fa.values.size() != fb.values.size()) {
      throw ArgumentError("fsd: feature shape mismatch");
    }
    const std::size_t hw = static_cast<std::size_t>(fa.height) * fa.width;
    for (int c = 0; c < fa.channels; ++c) {
      const double* pa = fa.values.data() + c * hw;
      const double* pb = fb.values.data() + c * hw;
      double ma = 0.0, mb = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        ma += pa[i];
        mb += pb[i];
      }
      ma /= hw;
      mb /= hw;
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        const double da = pa[i] - ma, db = pb[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
      }
      va /= hw;
      vb /= hw;
      cov /= hw;
      const double luminance = (2.0 * ma * mb + config.c1) / (ma * ma + mb * mb + config.c1);
      const double structure = (2.0 * cov + config.c2) / (va + vb + config.c2);
      total += luminance * structure;
      ++terms;
    }
  }
  if (terms == 0) throw ArgumentError("fsd: no feature channels");
  return 1.0 - total / static_cast<double>(terms);
}

double fsd(const Classifier& clf, const Image& a, const Image& b, const FsdConfig& config) {
  config.validate();
  require_same_shape(a, b, "fsd");
  return fsd_from_features(fsd_features(clf, a, config), fsd_features(clf, b, config), config);
}

double metric_value(MetricKind kind, const Classifier* clf, const Image& a, const Image& b,
                    const FsdConfig& fsd_config) {
  switch (kind) {
    case MetricKind::kPsnr: return psnr(a, b);
    case MetricKind::kL2: return l2(a, b);
    case MetricKind::kLogitsL1:
    case MetricKind::kFsd:
      if (clf == nullptr) {
        throw ConfigError(std::string(metric_name(kind)) + " needs a classifier");
      }
      return kind == MetricKind::kFsd ? fsd(*clf, a, b, fsd_config) : logits_l1(*clf, a, b);
  }
  throw ArgumentError("unknown metric");
}

double orient_as_ood_score(MetricKind kind, double raw_value) {
  return larger_is_more_similar(kind) ? -raw_value : raw_value;
}

double ood_score(MetricKind kind, const Classifier* clf, const Image& input,
                 const Image& synthesis, const FsdConfig& fsd_config) {
  return orient_as_ood_score(kind, metric_value(kind, clf, input, synthesis, fsd_config));
}

}  // namespace semguard
