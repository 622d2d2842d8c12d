// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

// Batched layer kernels with hand-written backward passes.
//
// Activations are row-major matrices with one row per channel and one
// column per (sample, y, x), i.e. [C][N][H][W]. Parameters live in one flat
// vector per model; layers address it through offsets so that checkpoints,
// optimizers and gradient buffers are plain arrays.

#ifndef SEMGUARD_SRC_NN_OPS_HPP_
#define SEMGUARD_SRC_NN_OPS_HPP_

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "semguard/image.hpp"
#include "semguard/rng.hpp"

namespace semguard::detail {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct Geometry {
  int n = 1;
  int h = 0;
  int w = 0;
  int hw() const { return h * w; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(n) * h * w; }
};

struct ConvLayer {
  int in = 0;
  int out = 0;
  std::size_t weight = 0;  // out x (in * 9)
  std::size_t bias = 0;    // out
};

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // out
};

/// Hands out consecutive offsets into a flat parameter vector.
class ParamLayout {
 public:
  std::size_t take(std::size_t n) {
    const std::size_t off = size_;
    size_ += n;
    return off;
  }
  ConvLayer conv(int in, int out) {
    ConvLayer c{in, out, 0, 0};
    c.weight = take(static_cast<std::size_t>(out) * in * 9);
    c.bias = take(out);
    return c;
  }
  DenseLayer dense(int in, int out) {
    DenseLayer d{in, out, 0, 0};
    d.weight = take(static_cast<std::size_t>(out) * in);
    d.bias = take(out);
    return d;
  }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

/// Uniform(-bound, bound) with bound = scale / sqrt(fan_in); zero bias.
void init_conv(std::span<double> params, const ConvLayer& layer, RngStream& rng,
               double scale = 1.0);
void init_dense(std::span<double> params, const DenseLayer& layer, RngStream& rng,
                double scale = 1.0);

Mat images_to_mat(std::span<const Image* const> images);
Image mat_to_image(const Mat& m, Geometry g, int sample);

// 3x3 convolution with zero padding 1.
Mat conv_forward(const double* params, const ConvLayer& layer, const Mat& x, Geometry g);
/// Accumulates parameter gradients into `grad` (if non-null) and writes the
/// input gradient into `dx` (if non-null).
void conv_backward(const double* params, const ConvLayer& layer, const Mat& x, Geometry g,
                   const Mat& dy, double* grad, Mat* dx);

/// rows = samples.
Mat dense_forward(const double* params, const DenseLayer& layer, const Mat& x);
void dense_backward(const double* params, const DenseLayer& layer, const Mat& x,
                    const Mat& dy, double* grad, Mat* dx);

Mat silu(const Mat& z);
/// dz = dy * silu'(z)
Mat silu_backward(const Mat& z, const Mat& dy);
Mat relu(const Mat& z);
Mat relu_backward(const Mat& z, const Mat& dy);

Mat avgpool2_forward(const Mat& x, Geometry g);
Mat avgpool2_backward(const Mat& dy, Geometry g);

/// N x C per-sample spatial means.
Mat global_avg_pool(const Mat& x, Geometry g);
Mat global_avg_pool_backward(const Mat& dy, Geometry g);

/// Adds per-sample channel biases `b` (N x C) to every pixel.
void add_sample_bias(Mat& x, const Mat& b, Geometry g);
/// Sums `dx` over pixels of each sample: result is N x C.
Mat sum_sample_bias(const Mat& dx, Geometry g);

/// Bilinear resize of a single-channel map, half-pixel centres.
std::vector<double> bilinear_resize(std::span<const double> src, int src_h, int src_w,
                                    int dst_h, int dst_w);

/// Keeps large activation buffers on the heap instead of fresh mmaps.
void tune_allocator();

}  // namespace semguard::detail

#endif  // SEMGUARD_SRC_NN_OPS_HPP_
