// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace semguard::testing {

Image random_image(RngStream& rng, int c, int h, int w, double lo, double hi) {
  Image x(c, h, w);
  for (double& v : x.pixels()) v = rng.next_range(lo, hi);
  return x;
}

Image gaussian_image(RngStream& rng, int c, int h, int w) {
  Image x(c, h, w);
  for (double& v : x.pixels()) v = rng.next_gaussian();
  return x;
}

double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> to_vec(const Image& x) { return {x.pixels().begin(), x.pixels().end()}; }

namespace oracle {

std::vector<double> ddim_step(const std::vector<double>& x, const std::vector<double>& eps,
                              double a_t, double a_prev, double sigma,
                              const std::vector<double>& z) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred_x0 = (x[i] - std::sqrt(1 - a_t) * eps[i]) / std::sqrt(a_t);
    const double direction = std::sqrt(1 - a_prev - sigma * sigma) * eps[i];
    out[i] = std::sqrt(a_prev) * pred_x0 + direction + (z.empty() ? 0.0 : sigma * z[i]);
  }
  return out;
}

std::vector<double> invert_step(const std::vector<double>& x, const std::vector<double>& eps,
                                double a_t, double a_next) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::sqrt(a_next) * ((x[i] - std::sqrt(1 - a_t) * eps[i]) / std::sqrt(a_t)) +
             std::sqrt(1 - a_next) * eps[i];
  }
  return out;
}

std::vector<double> estimate_x0(const std::vector<double>& x, const std::vector<double>& eps,
                                double a_t) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (x[i] - std::sqrt(1 - a_t) * eps[i]) / std::sqrt(a_t);
  }
  return out;
}

std::vector<double> classifier_guidance(const std::vector<double>& eps,
                                        const std::vector<double>& grad, double s, double a_t,
                                        double sign) {
  std::vector<double> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    out[i] = eps[i] + sign * s * std::sqrt(1 - a_t) * grad[i];
  }
  return out;
}

std::vector<double> cfg(const std::vector<double>& e_null, const std::vector<double>& e_cond,
                        double w) {
  std::vector<double> out(e_null.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1 - w) * e_null[i] + w * e_cond[i];
  return out;
}

double psnr(const std::vector<double>& a, const std::vector<double>& b) {
  long double sse = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sse += (long double)(a[i] - b[i]) * (a[i] - b[i]);
  const double mse = static_cast<double>(sse / a.size());
  if (mse < 1e-10) return 99.0;
  return std::min(99.0, -10.0 * std::log10(mse));
}

double mls(const std::vector<double>& logits) {
  double m = -INFINITY;
  for (double l : logits) m = l > m ? l : m;
  return m;
}

double ebo(const std::vector<double>& logits, double temperature) {
  long double s = 0;
  for (double l : logits) s += std::exp((long double)l / temperature);
  return -temperature * static_cast<double>(std::log(s));
}

double fsd(const std::vector<FeatureMap>& a, const std::vector<FeatureMap>& b, double c1,
           double c2) {
  double total = 0;
  int terms = 0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const int n = a[l].height * a[l].width;
    for (int c = 0; c < a[l].channels; ++c) {
      std::vector<double> u, v;
      for (int y = 0; y < a[l].height; ++y) {
        for (int x = 0; x < a[l].width; ++x) {
          u.push_back(a[l].at(c, y, x));
          v.push_back(b[l].at(c, y, x));
        }
      }
      double mu = 0, mv = 0;
      for (int i = 0; i < n; ++i) {
        mu += u[i] / n;
        mv += v[i] / n;
      }
      double vu = 0, vv = 0, cov = 0;
      for (int i = 0; i < n; ++i) {
        vu += (u[i] - mu) * (u[i] - mu) / n;
        vv += (v[i] - mv) * (v[i] - mv) / n;
        cov += (u[i] - mu) * (v[i] - mv) / n;
      }
      const double structure = (2 * mu * mv + c1) / (mu * mu + mv * mv + c1);
      const double texture = (2 * cov + c2) / (vu + vv + c2);
      total += structure * texture;
      ++terms;
    }
  }
  return 1 - total / terms;
}

double auroc(const std::vector<ScoredSample>& s) {
  double wins = 0;
  double pairs = 0;
  for (const auto& o : s) {
    if (o.truth != Distribution::kOOD) continue;
    for (const auto& i : s) {
      if (i.truth != Distribution::kInD) continue;
      pairs += 1;
      if (o.score > i.score) wins += 1;
      else if (o.score == i.score) wins += 0.5;
    }
  }
  return wins / pairs;
}

FprResult fpr_at_tpr(const std::vector<ScoredSample>& s, double tpr) {
  int n_ind = 0, n_ood = 0;
  for (const auto& x : s) (x.truth == Distribution::kInD ? n_ind : n_ood)++;
  FprResult best;
  bool found = false;
  for (const auto& cand : s) {
    if (cand.truth != Distribution::kInD) continue;
    int acc_ind = 0, acc_ood = 0;
    for (const auto& x : s) {
      if (x.score <= cand.score) (x.truth == Distribution::kInD ? acc_ind : acc_ood)++;
    }
    if (acc_ind < tpr * n_ind - 1e-9) continue;
    if (!found || cand.score < best.threshold) {
      best.threshold = cand.score;
      best.fpr = static_cast<double>(acc_ood) / n_ood;
      found = true;
    }
  }
  best.coarse = n_ind < 20;
  return best;
}

std::vector<double> disk_coverage(int side, double cx, double cy, double r, int n) {
  std::vector<double> cov(side * side, 0.0);
  for (int py = 0; py < side; ++py) {
    for (int px = 0; px < side; ++px) {
      int inside = 0;
      for (int k = 0; k < n * n; ++k) {
        const double sx = px + (k % n + 0.5) / n;
        const double sy = py + (k / n + 0.5) / n;
        const double dx = (sx - cx) / r, dy = (sy - cy) / r;
        if (dx * dx + dy * dy <= 1.0) ++inside;
      }
      cov[py * side + px] = static_cast<double>(inside) / (n * n);
    }
  }
  return cov;
}

}  // namespace oracle

double central_difference(const std::function<double(const Image&)>& f, const Image& x,
                          std::size_t i, double h) {
  Image plus = x, minus = x;
  plus[i] += h;
  minus[i] -= h;
  return (f(plus) - f(minus)) / (2 * h);
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace semguard::testing
