// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nn_internal.hpp"
#include "semguard/errors.hpp"

namespace semguard {

using detail::Geometry;
using detail::Mat;

namespace {

class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + 1e-8);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  std::vector<double> m_, v_;
  int t_ = 0;
};

void validate_train_config(const TrainConfig& c) {
  if (c.epochs < 1 || c.batch_size < 1 || !(c.learning_rate > 0.0)) {
    throw ConfigError("training needs epochs >= 1, batch_size >= 1, learning_rate > 0");
  }
  if (!(c.ema_decay >= 0.0 && c.ema_decay < 1.0)) throw ConfigError("ema_decay must lie in [0, 1)");
  if (!(c.p_uncond >= 0.0 && c.p_uncond < 1.0)) {
    throw ConfigError("p_uncond must lie in [0, 1)");
  }
}

void shuffle(std::vector<std::size_t>& order, RngStream& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_index(static_cast<int>(i)))]);
  }
}

double scheduled_lr(const TrainConfig& c, long step, long total) {
  const double progress = total > 1 ? static_cast<double>(step) / (total - 1) : 0.0;
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return c.learning_rate * (c.final_lr_fraction + (1.0 - c.final_lr_fraction) * cosine);
}

void clip_global_norm(std::vector<double>& grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    for (double& g : grad) g *= max_norm / norm;
  }
}

void snap_params(std::span<double> params) {
  for (double& p : params) p = static_cast<float>(p);
}

template <typename StepFn>
TrainResult run_epochs(std::size_t n_items, const TrainConfig& config, std::span<double> params,
                       const char* stream_name, StepFn&& step_fn) {
  TrainResult result;
  const RngStream root = RngStream(config.seed).split(stream_name);
  const long steps_per_epoch =
      static_cast<long>((n_items + config.batch_size - 1) / config.batch_size);
  const long total_steps = steps_per_epoch * config.epochs;
  Adam adam(params.size());
  std::vector<double> grad(params.size());
  std::vector<std::size_t> order(n_items);
  std::vector<double> ema;
  if (config.ema_decay > 0.0) ema.assign(params.begin(), params.end());
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    RngStream shuffle_rng = root.split("epoch", epoch);
    shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < n_items; start += config.batch_size, ++step) {
      const std::size_t stop = std::min(n_items, start + config.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      RngStream batch_rng = root.split("batch", step);
      const double loss = step_fn(batch, grad, batch_rng, result);
      if (!std::isfinite(loss)) throw TrainingError("training loss is not finite", epoch);
      result.loss_curve.push_back(loss);
      clip_global_norm(grad, 1.0);
      adam.step(params, grad, scheduled_lr(config, step, total_steps));
      if (!ema.empty()) {
        const double d = std::min(config.ema_decay, (1.0 + step) / (10.0 + step));
        for (std::size_t i = 0; i < ema.size(); ++i) ema[i] = d * ema[i] + (1.0 - d) * params[i];
      }
    }
  }
  if (!ema.empty()) std::copy(ema.begin(), ema.end(), params.begin());
  snap_params(params);
  return result;
}

}  // namespace

TrainResult train_score(ScoreNetwork& net, std::span<const Image> images,
                        std::span<const int> labels, const NoiseSchedule& schedule,
                        const TrainConfig& config) {
  validate_train_config(config);
  if (images.empty()) throw ArgumentError("train_score: empty dataset");
  if (images.size() != labels.size()) throw ArgumentError("train_score: label count mismatch");
  if (schedule.total_steps() > net.config().max_timestep) {
    throw ConfigError("schedule T exceeds the score network's max_timestep");
  }
  const ScoreNetConfig& nc = net.config();
  const Geometry g1{1, nc.side, nc.side};
  return run_epochs(
      images.size(), config, net.mutable_parameters(), "train_score",
      [&](std::span<const std::size_t> batch, std::vector<double>& grad, RngStream& rng,
          TrainResult& result) {
        const int n = static_cast<int>(batch.size());
        std::vector<Image> x_t;
        std::vector<Image> noise;
        std::vector<int> ts(n), ys(n);
        x_t.reserve(n);
        noise.reserve(n);
        for (int i = 0; i < n; ++i) {
          const Image& x0 = images[batch[i]];
          ts[i] = 1 + rng.next_index(schedule.total_steps());
          const bool drop = net.conditional() && rng.next_uniform() < config.p_uncond;
          ys[i] = (!net.conditional() || drop) ? kNullLabel : labels[batch[i]];
          if (net.conditional()) {
            ++result.total_draws;
            if (drop) ++result.null_label_draws;
          }
          Image eps(x0.channels(), x0.height(), x0.width());
          for (double& v : eps.pixels()) v = rng.next_gaussian();
          x_t.push_back(forward_diffuse(x0, ts[i], schedule, eps));
          noise.push_back(std::move(eps));
        }
        std::vector<const Image*> xp, np;
        for (int i = 0; i < n; ++i) {
          xp.push_back(&x_t[i]);
          np.push_back(&noise[i]);
        }
        const Geometry g{n, g1.h, g1.w};
        detail::ScoreCache cache;
        ScoreNetAccess::forward(net, detail::images_to_mat(xp), g, ts, ys, cache);
        const Mat target = detail::images_to_mat(np);
        const Mat diff = cache.out - target;
        const double numel = static_cast<double>(diff.size());
        const double loss = diff.squaredNorm() / numel;
        const Mat d_out = diff * (2.0 / numel);
        ScoreNetAccess::backward(net, cache, d_out, grad.data(), nullptr);
        return loss;
      });
}

TrainResult train_classifier(Classifier& clf, std::span<const Image> images,
                             std::span<const int> labels, const TrainConfig& config) {
  validate_train_config(config);
  if (images.empty()) throw ArgumentError("train_classifier: empty dataset");
  if (images.size() != labels.size()) {
    throw ArgumentError("train_classifier: label count mismatch");
  }
  for (int y : labels) {
    if (y < 0 || y >= clf.num_classes()) throw ArgumentError("label outside classifier range");
  }
  const ClassifierConfig& cc = clf.config();
  return run_epochs(
      images.size(), config, clf.mutable_parameters(), "train_classifier",
      [&](std::span<const std::size_t> batch, std::vector<double>& grad, RngStream&,
          TrainResult& result) {
        const int n = static_cast<int>(batch.size());
        std::vector<const Image*> xp;
        for (std::size_t i : batch) xp.push_back(&images[i]);
        detail::ClassifierCache cache;
        ClassifierAccess::forward(clf, detail::images_to_mat(xp), Geometry{n, cc.side, cc.side},
                                  cache);
        Mat d_logits(n, clf.num_classes());
        double loss = 0.0;
        for (int i = 0; i < n; ++i) {
          const std::vector<double> row(cache.logits.row(i).data(),
                                        cache.logits.row(i).data() + clf.num_classes());
          const std::vector<double> p = softmax(row);
          const int y = labels[batch[i]];
          loss -= std::log(std::max(p[y], 1e-300));
          for (int k = 0; k < clf.num_classes(); ++k) {
            d_logits(i, k) = (p[k] - (k == y ? 1.0 : 0.0)) / n;
          }
        }
        result.total_draws += n;
        ClassifierAccess::backward(clf, cache, d_logits, grad.data(), nullptr);
        return loss / n;
      });
}

std::vector<AccuracyPoint> accuracy_vs_timestep(const Classifier& clf, const ScoreNetwork& net,
                                                std::span<const Image> images,
                                                std::span<const int> labels,
                                                const NoiseSchedule& schedule,
                                                AccuracyMode mode, std::span<const int> grid,
                                                const RngStream& rng) {
  if (images.size() != labels.size() || images.empty()) {
    throw ArgumentError("accuracy_vs_timestep: need matching, nonempty images and labels");
  }
  constexpr std::size_t kChunk = 64;
  std::vector<AccuracyPoint> curve;
  for (int t : grid) {
    if (t < 0 || t > schedule.total_steps()) throw ArgumentError("grid timestep out of range");
    long correct = 0;
    for (std::size_t start = 0; start < images.size(); start += kChunk) {
      const std::size_t stop = std::min(images.size(), start + kChunk);
      std::vector<Image> inputs;
      for (std::size_t i = start; i < stop; ++i) {
        if (t == 0) {
          inputs.push_back(images[i]);
          continue;
        }
        RngStream noise_rng = rng.split("noise", i);
        Image eps(images[i].channels(), images[i].height(), images[i].width());
        for (double& v : eps.pixels()) v = noise_rng.next_gaussian();
        inputs.push_back(forward_diffuse(images[i], t, schedule, eps));
      }
      if (mode == AccuracyMode::kXhat0 && t > 0) {
        std::vector<const Image*> xp;
        for (const Image& x : inputs) xp.push_back(&x);
        const std::vector<int> ts(xp.size(), t), ys(xp.size(), kNullLabel);
        std::vector<Image> eps = net.eval_batch(xp, ts, ys);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          inputs[i] = estimate_x0(inputs[i], eps[i], t, schedule);
        }
      }
      std::vector<const Image*> xp;
      for (const Image& x : inputs) xp.push_back(&x);
      const auto logits = clf.logits_batch(xp);
      for (std::size_t i = 0; i < logits.size(); ++i) {
        if (argmax(logits[i]) == labels[start + i]) ++correct;
      }
    }
    curve.push_back({t, static_cast<double>(correct) / images.size()});
  }
  return curve;
}

}  // namespace semguard
