// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <string>

#include "nn_internal.hpp"
#include "semguard/errors.hpp"

namespace semguard {

using detail::Geometry;
using detail::Mat;

namespace {

std::shared_ptr<const ScoreNetwork::Layout> make_layout(const ScoreNetConfig& c) {
  auto l = std::make_shared<ScoreNetwork::Layout>();
  detail::ParamLayout p;
  l->conv_in = p.conv(c.channels, c.width);
  l->time_dense = p.dense(c.embed_dim, c.embed_dim);
  if (c.num_classes > 0) {
    l->class_table = p.take(static_cast<std::size_t>(c.num_classes + 1) * c.embed_dim);
  }
  for (int b = 0; b < c.blocks; ++b) {
    l->conv1.push_back(p.conv(c.width, c.width));
    l->proj.push_back(p.dense(c.embed_dim, c.width));
    l->conv2.push_back(p.conv(c.width, c.width));
  }
  l->conv_out = p.conv(c.width, c.channels);
  l->total = p.size();
  return l;
}

Mat sinusoidal_embedding(std::span<const int> t, int dim) {
  const int half = dim / 2;
  Mat s(static_cast<Eigen::Index>(t.size()), dim);
  for (std::size_t n = 0; n < t.size(); ++n) {
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / half);
      s(n, k) = std::sin(t[n] * freq);
      s(n, half + k) = std::cos(t[n] * freq);
    }
  }
  return s;
}

}  // namespace

ScoreNetwork::ScoreNetwork(const ScoreNetConfig& config, std::uint64_t seed)
    : config_(config) {
  detail::tune_allocator();
  if (config.channels <= 0 || config.side <= 0 || config.width <= 0 || config.blocks < 0 ||
      config.embed_dim < 2 || config.embed_dim % 2 != 0 || config.num_classes < 0 ||
      config.max_timestep < 1) {
    throw ConfigError("invalid score network configuration");
  }
  layout_ = make_layout(config);
  params_.assign(layout_->total, 0.0);
  RngStream rng = RngStream(seed).split("score_init");
  const Layout& l = *layout_;
  detail::init_conv(params_, l.conv_in, rng);
  detail::init_dense(params_, l.time_dense, rng);
  if (conditional()) {
    const std::size_t n = static_cast<std::size_t>(config.num_classes + 1) * config.embed_dim;
    for (std::size_t i = 0; i < n; ++i) {
      params_[l.class_table + i] = static_cast<float>(rng.next_range(-1.0, 1.0));
    }
  }
  for (int b = 0; b < config.blocks; ++b) {
    detail::init_conv(params_, l.conv1[b], rng);
    detail::init_dense(params_, l.proj[b], rng);
    detail::init_conv(params_, l.conv2[b], rng);
  }
  // conv_out stays zero: the fresh network predicts zero noise.
}

void ScoreNetwork::validate(const Image& x, int t, int y) const {
  if (x.channels() != config_.channels || x.height() != config_.side ||
      x.width() != config_.side) {
    throw ArgumentError("score network input shape mismatch");
  }
  if (t < 1 || t > config_.max_timestep) {
    throw ArgumentError("timestep " + std::to_string(t) + " outside [1, " +
                        std::to_string(config_.max_timestep) + "]");
  }
  if (y != kNullLabel && (y < 0 || y >= config_.num_classes)) {
    throw ArgumentError("invalid class label " + std::to_string(y));
  }
}

void ScoreNetAccess::forward(const ScoreNetwork& net, const Mat& x, Geometry g,
                             std::span<const int> t, std::span<const int> y,
                             detail::ScoreCache& cache) {
  const ScoreNetConfig& c = net.config_;
  const ScoreNetwork::Layout& l = *net.layout_;
  const double* p = net.params_.data();
  cache.g = g;
  cache.x = x;
  cache.sinus = sinusoidal_embedding(t, c.embed_dim);
  cache.e_pre = detail::dense_forward(p, l.time_dense, cache.sinus);
  cache.e = detail::silu(cache.e_pre);
  cache.rows.assign(g.n, 0);
  if (net.conditional()) {
    for (int n = 0; n < g.n; ++n) {
      const int row = y[n] == kNullLabel ? c.num_classes : y[n];
      cache.rows[n] = row;
      cache.e.row(n) += Eigen::Map<const detail::Vec>(
                            p + l.class_table + static_cast<std::size_t>(row) * c.embed_dim,
                            c.embed_dim)
                            .transpose();
    }
  }
  cache.ea = detail::silu(cache.e);
  cache.h.assign(1, detail::conv_forward(p, l.conv_in, x, g));
  cache.u.clear();
  for (int b = 0; b < c.blocks; ++b) {
    const Mat& h = cache.h.back();
    Mat u = detail::conv_forward(p, l.conv1[b], detail::silu(h), g);
    detail::add_sample_bias(u, detail::dense_forward(p, l.proj[b], cache.ea), g);
    Mat next = h + detail::conv_forward(p, l.conv2[b], detail::silu(u), g);
    cache.u.push_back(std::move(u));
    cache.h.push_back(std::move(next));
  }
  cache.out = detail::conv_forward(p, l.conv_out, detail::silu(cache.h.back()), g);
}

void ScoreNetAccess::backward(const ScoreNetwork& net, const detail::ScoreCache& cache,
                              const Mat& d_out, double* grad, Mat* dx) {
  const ScoreNetConfig& c = net.config_;
  const ScoreNetwork::Layout& l = *net.layout_;
  const double* p = net.params_.data();
  const Geometry g = cache.g;
  Mat da;
  detail::conv_backward(p, l.conv_out, detail::silu(cache.h.back()), g, d_out, grad, &da);
  Mat dh = detail::silu_backward(cache.h.back(), da);
  Mat d_ea = Mat::Zero(g.n, c.embed_dim);
  for (int b = c.blocks - 1; b >= 0; --b) {
    const Mat& h = cache.h[b];
    const Mat& u = cache.u[b];
    Mat dv;
    detail::conv_backward(p, l.conv2[b], detail::silu(u), g, dh, grad, &dv);
    Mat du = detail::silu_backward(u, dv);
    Mat dproj = detail::sum_sample_bias(du, g);
    Mat dea_b;
    detail::dense_backward(p, l.proj[b], cache.ea, dproj, grad, &dea_b);
    d_ea += dea_b;
    Mat da1;
    detail::conv_backward(p, l.conv1[b], detail::silu(h), g, du, grad, &da1);
    dh += detail::silu_backward(h, da1);
  }
  detail::conv_backward(p, l.conv_in, cache.x, g, dh, grad, dx);
  if (grad == nullptr) return;
  Mat de = detail::silu_backward(cache.e, d_ea);
  if (net.conditional()) {
    for (int n = 0; n < g.n; ++n) {
      Eigen::Map<detail::Vec>(grad + l.class_table +
                                  static_cast<std::size_t>(cache.rows[n]) * c.embed_dim,
                              c.embed_dim) += de.row(n).transpose();
    }
  }
  Mat de_pre = detail::silu_backward(cache.e_pre, de);
  detail::dense_backward(p, l.time_dense, cache.sinus, de_pre, grad, nullptr);
}

Image ScoreNetwork::eval(const Image& x_t, int t, int y) const {
  const Image* xs[] = {&x_t};
  const int ts[] = {t};
  const int ys[] = {y};
  return std::move(eval_batch(xs, ts, ys).front());
}

std::vector<Image> ScoreNetwork::eval_batch(std::span<const Image* const> x_t,
                                            std::span<const int> t,
                                            std::span<const int> y) const {
  if (x_t.size() != t.size() || x_t.size() != y.size()) {
    throw ArgumentError("eval_batch: mismatched batch sizes");
  }
  for (std::size_t i = 0; i < x_t.size(); ++i) validate(*x_t[i], t[i], y[i]);
  const Geometry g{static_cast<int>(x_t.size()), config_.side, config_.side};
  detail::ScoreCache cache;
  ScoreNetAccess::forward(*this, detail::images_to_mat(x_t), g, t, y, cache);
  std::vector<Image> out;
  out.reserve(x_t.size());
  for (int n = 0; n < g.n; ++n) out.push_back(detail::mat_to_image(cache.out, g, n));
  return out;
}

Image ScoreNetwork::input_vjp(const Image& x_t, int t, int y, const Image& upstream,
                              Image* eps_out) const {
  validate(x_t, t, y);
  require_same_shape(x_t, upstream, "input_vjp");
  const Geometry g{1, config_.side, config_.side};
  const Image* xs[] = {&x_t};
  const Image* us[] = {&upstream};
  const int ts[] = {t};
  const int ys[] = {y};
  detail::ScoreCache cache;
  ScoreNetAccess::forward(*this, detail::images_to_mat(xs), g, ts, ys, cache);
  if (eps_out != nullptr) *eps_out = detail::mat_to_image(cache.out, g, 0);
  Mat dx;
  ScoreNetAccess::backward(*this, cache, detail::images_to_mat(us), nullptr, &dx);
  return detail::mat_to_image(dx, g, 0);
}

NoisePredictor ScoreNetwork::predictor(int y) const {
  return [this, y](const Image& x, int t) { return eval(x, t, y); };
}

}  // namespace semguard
