// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "nn_internal.hpp"
#include "semguard/errors.hpp"

namespace semguard {

using detail::Geometry;
using detail::Mat;

namespace {

std::shared_ptr<const Classifier::Layout> make_layout(const ClassifierConfig& c) {
  auto l = std::make_shared<Classifier::Layout>();
  detail::ParamLayout p;
  l->conv1 = p.conv(c.channels, c.width1);
  l->conv2 = p.conv(c.width1, c.width2);
  l->conv3 = p.conv(c.width2, c.width3);
  l->head = p.dense(c.width3, c.num_classes);
  l->total = p.size();
  return l;
}

}  // namespace

int argmax(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) z += (v = std::exp(v - m));
  for (double& v : p) v /= z;
  return p;
}

Classifier::Classifier(const ClassifierConfig& config, std::uint64_t seed) : config_(config) {
  detail::tune_allocator();
  if (config.channels <= 0 || config.side < 2 || config.side % 2 != 0 || config.width1 <= 0 ||
      config.width2 <= 0 || config.width3 <= 0 || config.num_classes <= 0) {
    throw ConfigError("invalid classifier configuration");
  }
  layout_ = make_layout(config);
  params_.assign(layout_->total, 0.0);
  RngStream rng = RngStream(seed).split("classifier_init");
  const double relu_gain = std::sqrt(6.0);
  detail::init_conv(params_, layout_->conv1, rng, relu_gain);
  detail::init_conv(params_, layout_->conv2, rng, relu_gain);
  detail::init_conv(params_, layout_->conv3, rng, relu_gain);
  detail::init_dense(params_, layout_->head, rng);
}

void Classifier::validate(const Image& x) const {
  if (x.channels() != config_.channels || x.height() != config_.side ||
      x.width() != config_.side) {
    throw ArgumentError("classifier input shape mismatch");
  }
}

void ClassifierAccess::forward(const Classifier& clf, const Mat& x, Geometry g,
                               detail::ClassifierCache& c) {
  const Classifier::Layout& l = *clf.layout_;
  const double* p = clf.params_.data();
  c.g1 = g;
  c.g2 = Geometry{g.n, g.h / 2, g.w / 2};
  c.x = x;
  c.z1 = detail::conv_forward(p, l.conv1, x, c.g1);
  c.a1 = detail::relu(c.z1);
  c.z2 = detail::conv_forward(p, l.conv2, c.a1, c.g1);
  c.a2 = detail::relu(c.z2);
  c.p2 = detail::avgpool2_forward(c.a2, c.g1);
  c.z3 = detail::conv_forward(p, l.conv3, c.p2, c.g2);
  c.a3 = detail::relu(c.z3);
  c.pooled = detail::global_avg_pool(c.a3, c.g2);
  c.logits = detail::dense_forward(p, l.head, c.pooled);
}

void ClassifierAccess::backward(const Classifier& clf, const detail::ClassifierCache& c,
                                const Mat& d_logits, double* grad, Mat* dx, Mat* d_a3) {
  const Classifier::Layout& l = *clf.layout_;
  const double* p = clf.params_.data();
  Mat d_pooled;
  detail::dense_backward(p, l.head, c.pooled, d_logits, grad, &d_pooled);
  Mat da3 = detail::global_avg_pool_backward(d_pooled, c.g2);
  if (d_a3 != nullptr) *d_a3 = da3;
  if (grad == nullptr && dx == nullptr) return;
  Mat dz3 = detail::relu_backward(c.z3, da3);
  Mat dp2;
  detail::conv_backward(p, l.conv3, c.p2, c.g2, dz3, grad, &dp2);
  Mat dz2 = detail::relu_backward(c.z2, detail::avgpool2_backward(dp2, c.g1));
  Mat da1;
  detail::conv_backward(p, l.conv2, c.a1, c.g1, dz2, grad, &da1);
  Mat dz1 = detail::relu_backward(c.z1, da1);
  detail::conv_backward(p, l.conv1, c.x, c.g1, dz1, grad, dx);
}

std::vector<double> Classifier::logits(const Image& x) const {
  const Image* xs[] = {&x};
  return logits_batch(xs).front();
}

std::vector<std::vector<double>> Classifier::logits_batch(
    std::span<const Image* const> x) const {
  for (const Image* img : x) validate(*img);
  detail::ClassifierCache cache;
  ClassifierAccess::forward(*this, detail::images_to_mat(x),
                            Geometry{static_cast<int>(x.size()), config_.side, config_.side},
                            cache);
  std::vector<std::vector<double>> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    out[n].assign(cache.logits.row(n).data(), cache.logits.row(n).data() + num_classes());
  }
  return out;
}

Image Classifier::input_log_prob_grad(const Image& x, int y) const {
  const Image* xs[] = {&x};
  const int ys[] = {y};
  return std::move(input_log_prob_grad_batch(xs, ys).front());
}

std::vector<Image> Classifier::input_log_prob_grad_batch(std::span<const Image* const> x,
                                                         std::span<const int> y,
                                                         std::vector<double>* log_probs) const {
  if (x.size() != y.size()) throw ArgumentError("mismatched batch sizes");
  for (const Image* img : x) validate(*img);
  for (int label : y) {
    if (label < 0 || label >= num_classes()) throw ArgumentError("invalid class label");
  }
  const Geometry g{static_cast<int>(x.size()), config_.side, config_.side};
  detail::ClassifierCache cache;
  ClassifierAccess::forward(*this, detail::images_to_mat(x), g, cache);
  Mat d_logits(g.n, num_classes());
  if (log_probs != nullptr) log_probs->resize(g.n);
  for (int n = 0; n < g.n; ++n) {
    const std::vector<double> row(cache.logits.row(n).data(),
                                  cache.logits.row(n).data() + num_classes());
    const std::vector<double> prob = softmax(row);
    for (int k = 0; k < num_classes(); ++k) {
      d_logits(n, k) = (k == y[n] ? 1.0 : 0.0) - prob[k];
    }
    if (log_probs != nullptr) (*log_probs)[n] = std::log(prob[y[n]]);
  }
  Mat dx;
  ClassifierAccess::backward(*this, cache, d_logits, nullptr, &dx);
  std::vector<Image> out;
  out.reserve(g.n);
  for (int n = 0; n < g.n; ++n) out.push_back(detail::mat_to_image(dx, g, n));
  return out;
}

Image Classifier::grad_cam(const Image& x, int y) const {
  validate(x);
  if (y < 0 || y >= num_classes()) throw ArgumentError("invalid class label");
  const Geometry g{1, config_.side, config_.side};
  const Image* xs[] = {&x};
  detail::ClassifierCache cache;
  ClassifierAccess::forward(*this, detail::images_to_mat(xs), g, cache);
  Mat d_logits = Mat::Zero(1, num_classes());
  d_logits(0, y) = 1.0;
  Mat d_a3;
  ClassifierAccess::backward(*this, cache, d_logits, nullptr, nullptr, &d_a3);

  const Geometry g2 = cache.g2;
  std::vector<double> raw(g2.hw(), 0.0);
  for (Eigen::Index c = 0; c < cache.a3.rows(); ++c) {
    const double weight = d_a3.row(c).mean();
    for (int i = 0; i < g2.hw(); ++i) raw[i] += weight * cache.a3(c, i);
  }
  for (double& v : raw) v = std::max(v, 0.0);
  std::vector<double> up = detail::bilinear_resize(raw, g2.h, g2.w, g.h, g.w);
  Image cam(1, g.h, g.w);
  const double peak = *std::max_element(up.begin(), up.end());
  if (peak > 0.0) {
    for (std::size_t i = 0; i < up.size(); ++i) cam[i] = up[i] / peak;
  }
  return cam;
}

std::vector<FeatureMap> Classifier::features(const Image& x,
                                             std::span<const std::string> layers) const {
  validate(x);
  const Geometry g{1, config_.side, config_.side};
  const Image* xs[] = {&x};
  detail::ClassifierCache cache;
  ClassifierAccess::forward(*this, detail::images_to_mat(xs), g, cache);
  std::vector<FeatureMap> out;
  for (const std::string& name : layers) {
    const Mat* m = nullptr;
    Geometry lg;
    if (name == "block1") {
      m = &cache.a1;
      lg = cache.g1;
    } else if (name == "block2") {
      m = &cache.p2;
      lg = cache.g2;
    } else if (name == "block3") {
      m = &cache.a3;
      lg = cache.g2;
    } else {
      throw ConfigError("classifier has no feature layer '" + name + "'");
    }
    FeatureMap f{static_cast<int>(m->rows()), lg.h, lg.w, {}};
    f.values.assign(m->data(), m->data() + m->size());
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace semguard
