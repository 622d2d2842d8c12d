// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "semguard/errors.hpp"

namespace semguard::detail {

void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

namespace {

using ConstMap = Eigen::Map<const Mat>;
using MutMap = Eigen::Map<Mat>;

void init_uniform(std::span<double> params, std::size_t off, std::size_t n, double bound,
                  RngStream& rng) {
  for (std::size_t i = 0; i < n; ++i) {
    params[off + i] = static_cast<float>(rng.next_range(-bound, bound));
  }
}

// col row (ci*9 + ky*3 + kx) holds x[ci] shifted by (ky-1, kx-1).
void im2col(const Mat& x, Geometry g, Mat& col) {
  const int cin = static_cast<int>(x.rows());
  col.resize(static_cast<Eigen::Index>(cin) * 9, g.cols());
  const int h = g.h, w = g.w, hw = g.hw();
  for (int ci = 0; ci < cin; ++ci) {
    const double* src = x.row(ci).data();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* dst = col.row(ci * 9 + ky * 3 + kx).data();
        const int dy = ky - 1, dx = kx - 1;
        for (int n = 0; n < g.n; ++n) {
          const double* s = src + static_cast<std::ptrdiff_t>(n) * hw;
          double* d = dst + static_cast<std::ptrdiff_t>(n) * hw;
          for (int y = 0; y < h; ++y) {
            const int yy = y + dy;
            double* drow = d + y * w;
            if (yy < 0 || yy >= h) {
              std::fill(drow, drow + w, 0.0);
              continue;
            }
            const double* srow = s + yy * w;
            const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
            for (int xx = 0; xx < x0; ++xx) drow[xx] = 0.0;
            std::memcpy(drow + x0, srow + x0 + dx, sizeof(double) * (x1 - x0));
            for (int xx = x1; xx < w; ++xx) drow[xx] = 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const Mat& col, Geometry g, Mat& dx) {
  const int cin = static_cast<int>(dx.rows());
  const int h = g.h, w = g.w, hw = g.hw();
  for (int ci = 0; ci < cin; ++ci) {
    double* dst = dx.row(ci).data();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* src = col.row(ci * 9 + ky * 3 + kx).data();
        const int dy = ky - 1, dxs = kx - 1;
        for (int n = 0; n < g.n; ++n) {
          const double* s = src + static_cast<std::ptrdiff_t>(n) * hw;
          double* d = dst + static_cast<std::ptrdiff_t>(n) * hw;
          for (int y = 0; y < h; ++y) {
            const int yy = y + dy;
            if (yy < 0 || yy >= h) continue;
            const double* srow = s + y * w;
            double* drow = d + yy * w;
            const int x0 = std::max(0, -dxs), x1 = std::min(w, w - dxs);
            for (int xx = x0; xx < x1; ++xx) drow[xx + dxs] += srow[xx];
          }
        }
      }
    }
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void init_conv(std::span<double> params, const ConvLayer& layer, RngStream& rng,
               double scale) {
  const double bound = scale / std::sqrt(9.0 * layer.in);
  init_uniform(params, layer.weight, static_cast<std::size_t>(layer.out) * layer.in * 9,
               bound, rng);
  std::fill_n(params.begin() + layer.bias, layer.out, 0.0);
}

void init_dense(std::span<double> params, const DenseLayer& layer, RngStream& rng,
                double scale) {
  const double bound = scale / std::sqrt(static_cast<double>(layer.in));
  init_uniform(params, layer.weight, static_cast<std::size_t>(layer.out) * layer.in, bound,
               rng);
  std::fill_n(params.begin() + layer.bias, layer.out, 0.0);
}

Mat images_to_mat(std::span<const Image* const> images) {
  if (images.empty()) throw ArgumentError("empty image batch");
  const Image& first = *images.front();
  const int hw = first.height() * first.width();
  Mat m(first.channels(), static_cast<Eigen::Index>(images.size()) * hw);
  for (std::size_t n = 0; n < images.size(); ++n) {
    require_same_shape(first, *images[n], "batch");
    for (int c = 0; c < first.channels(); ++c) {
      std::memcpy(m.row(c).data() + n * hw,
                  images[n]->data() + static_cast<std::size_t>(c) * hw,
                  sizeof(double) * hw);
    }
  }
  return m;
}

Image mat_to_image(const Mat& m, Geometry g, int sample) {
  Image img(static_cast<int>(m.rows()), g.h, g.w);
  const int hw = g.hw();
  for (int c = 0; c < img.channels(); ++c) {
    std::memcpy(img.data() + static_cast<std::size_t>(c) * hw,
                m.row(c).data() + static_cast<std::ptrdiff_t>(sample) * hw,
                sizeof(double) * hw);
  }
  return img;
}

Mat conv_forward(const double* params, const ConvLayer& layer, const Mat& x, Geometry g) {
  Mat col;
  im2col(x, g, col);
  ConstMap weight(params + layer.weight, layer.out, static_cast<Eigen::Index>(layer.in) * 9);
  Eigen::Map<const Vec> bias(params + layer.bias, layer.out);
  Mat y(layer.out, g.cols());
  y.noalias() = weight * col;
  y.colwise() += bias;
  return y;
}

void conv_backward(const double* params, const ConvLayer& layer, const Mat& x, Geometry g,
                   const Mat& dy, double* grad, Mat* dx) {
  const Eigen::Index k = static_cast<Eigen::Index>(layer.in) * 9;
  ConstMap weight(params + layer.weight, layer.out, k);
  Mat col;
  im2col(x, g, col);
  if (grad != nullptr) {
    MutMap dweight(grad + layer.weight, layer.out, k);
    dweight.noalias() += dy * col.transpose();
    Eigen::Map<Vec> dbias(grad + layer.bias, layer.out);
    dbias += dy.rowwise().sum();
  }
  if (dx != nullptr) {
    Mat dcol(k, g.cols());
    dcol.noalias() = weight.transpose() * dy;
    dx->setZero(layer.in, g.cols());
    col2im_add(dcol, g, *dx);
  }
}

Mat dense_forward(const double* params, const DenseLayer& layer, const Mat& x) {
  ConstMap weight(params + layer.weight, layer.out, layer.in);
  Eigen::Map<const Vec> bias(params + layer.bias, layer.out);
  Mat y(x.rows(), layer.out);
  y.noalias() = x * weight.transpose();
  y.rowwise() += bias.transpose();
  return y;
}

void dense_backward(const double* params, const DenseLayer& layer, const Mat& x,
                    const Mat& dy, double* grad, Mat* dx) {
  ConstMap weight(params + layer.weight, layer.out, layer.in);
  if (grad != nullptr) {
    MutMap dweight(grad + layer.weight, layer.out, layer.in);
    dweight.noalias() += dy.transpose() * x;
    Eigen::Map<Vec> dbias(grad + layer.bias, layer.out);
    dbias += dy.colwise().sum().transpose();
  }
  if (dx != nullptr) {
    dx->resize(x.rows(), layer.in);
    dx->noalias() = dy * weight;
  }
}

Mat silu(const Mat& z) {
  return z.unaryExpr([](double v) { return v * sigmoid(v); });
}

Mat silu_backward(const Mat& z, const Mat& dy) {
  return z.binaryExpr(dy, [](double v, double d) {
    const double s = sigmoid(v);
    return d * s * (1.0 + v * (1.0 - s));
  });
}

Mat relu(const Mat& z) { return z.cwiseMax(0.0); }

Mat relu_backward(const Mat& z, const Mat& dy) {
  return z.binaryExpr(dy, [](double v, double d) { return v > 0.0 ? d : 0.0; });
}

Mat avgpool2_forward(const Mat& x, Geometry g) {
  const int oh = g.h / 2, ow = g.w / 2;
  Mat y(x.rows(), static_cast<Eigen::Index>(g.n) * oh * ow);
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    const double* s = x.row(c).data();
    double* d = y.row(c).data();
    for (int n = 0; n < g.n; ++n) {
      const double* sn = s + static_cast<std::ptrdiff_t>(n) * g.hw();
      double* dn = d + static_cast<std::ptrdiff_t>(n) * oh * ow;
      for (int yy = 0; yy < oh; ++yy) {
        for (int xx = 0; xx < ow; ++xx) {
          const double* p = sn + (2 * yy) * g.w + 2 * xx;
          dn[yy * ow + xx] = 0.25 * (p[0] + p[1] + p[g.w] + p[g.w + 1]);
        }
      }
    }
  }
  return y;
}

Mat avgpool2_backward(const Mat& dy, Geometry g) {
  const int oh = g.h / 2, ow = g.w / 2;
  Mat dx = Mat::Zero(dy.rows(), g.cols());
  for (Eigen::Index c = 0; c < dy.rows(); ++c) {
    const double* s = dy.row(c).data();
    double* d = dx.row(c).data();
    for (int n = 0; n < g.n; ++n) {
      const double* sn = s + static_cast<std::ptrdiff_t>(n) * oh * ow;
      double* dn = d + static_cast<std::ptrdiff_t>(n) * g.hw();
      for (int yy = 0; yy < oh; ++yy) {
        for (int xx = 0; xx < ow; ++xx) {
          const double v = 0.25 * sn[yy * ow + xx];
          double* p = dn + (2 * yy) * g.w + 2 * xx;
          p[0] += v;
          p[1] += v;
          p[g.w] += v;
          p[g.w + 1] += v;
        }
      }
    }
  }
  return dx;
}

Mat global_avg_pool(const Mat& x, Geometry g) {
  Mat out(g.n, x.rows());
  const int hw = g.hw();
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    for (int n = 0; n < g.n; ++n) {
      out(n, c) = x.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).sum() / hw;
    }
  }
  return out;
}

Mat global_avg_pool_backward(const Mat& dy, Geometry g) {
  Mat dx(dy.cols(), g.cols());
  const int hw = g.hw();
  for (Eigen::Index c = 0; c < dy.cols(); ++c) {
    for (int n = 0; n < g.n; ++n) {
      dx.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).setConstant(dy(n, c) / hw);
    }
  }
  return dx;
}

void add_sample_bias(Mat& x, const Mat& b, Geometry g) {
  const int hw = g.hw();
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    for (int n = 0; n < g.n; ++n) {
      x.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).array() += b(n, c);
    }
  }
}

Mat sum_sample_bias(const Mat& dx, Geometry g) {
  Mat out(g.n, dx.rows());
  const int hw = g.hw();
  for (Eigen::Index c = 0; c < dx.rows(); ++c) {
    for (int n = 0; n < g.n; ++n) {
      out(n, c) = dx.row(c).segment(static_cast<Eigen::Index>(n) * hw, hw).sum();
    }
  }
  return out;
}

std::vector<double> bilinear_resize(std::span<const double> src, int src_h, int src_w,
                                    int dst_h, int dst_w) {
  std::vector<double> dst(static_cast<std::size_t>(dst_h) * dst_w);
  const double sy = static_cast<double>(src_h) / dst_h;
  const double sx = static_cast<double>(src_w) / dst_w;
  for (int y = 0; y < dst_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src_h - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src_h - 1);
    const double ty = fy - y0;
    for (int x = 0; x < dst_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src_w - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src_w - 1);
      const double tx = fx - x0;
      const double top = src[y0 * src_w + x0] * (1 - tx) + src[y0 * src_w + x1] * tx;
      const double bot = src[y1 * src_w + x0] * (1 - tx) + src[y1 * src_w + x1] * tx;
      dst[static_cast<std::size_t>(y) * dst_w + x] = top * (1 - ty) + bot * ty;
    }
  }
  return dst;
}

}  // namespace semguard::detail
