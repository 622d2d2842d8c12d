// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_SRC_NN_INTERNAL_HPP_
#define SEMGUARD_SRC_NN_INTERNAL_HPP_

#include <span>
#include <vector>

#include "nn_ops.hpp"
#include "semguard/nn.hpp"

namespace semguard {

struct ScoreNetwork::Layout {
  detail::ConvLayer conv_in;
  detail::DenseLayer time_dense;
  std::size_t class_table = 0;  // (num_classes + 1) x embed_dim
  std::vector<detail::ConvLayer> conv1;
  std::vector<detail::DenseLayer> proj;
  std::vector<detail::ConvLayer> conv2;
  detail::ConvLayer conv_out;
  std::size_t total = 0;
};

struct Classifier::Layout {
  detail::ConvLayer conv1, conv2, conv3;
  detail::DenseLayer head;
  std::size_t total = 0;
};

namespace detail {

struct ScoreCache {
  Geometry g;
  Mat x;
  Mat sinus;  // N x D
  Mat e_pre;  // N x E
  Mat e;      // N x E, after adding the class embedding
  Mat ea;     // silu(e)
  std::vector<Mat> h;  // blocks + 1 residual stream states
  std::vector<Mat> u;  // block pre-activations
  Mat out;
  std::vector<int> rows;  // class-table row per sample
};

struct ClassifierCache {
  Geometry g1, g2;
  Mat x, z1, a1, z2, a2, p2, z3, a3;
  Mat pooled;  // N x C3
  Mat logits;  // N x K
};

}  // namespace detail

struct ScoreNetAccess {
  static void forward(const ScoreNetwork& net, const detail::Mat& x, detail::Geometry g,
                      std::span<const int> t, std::span<const int> y,
                      detail::ScoreCache& cache);
  /// Back-propagates d_out; accumulates parameter gradients into `grad`
  /// (nullable) and the input gradient into `dx` (nullable).
  static void backward(const ScoreNetwork& net, const detail::ScoreCache& cache,
                       const detail::Mat& d_out, double* grad, detail::Mat* dx);
};

struct ClassifierAccess {
  static void forward(const Classifier& clf, const detail::Mat& x, detail::Geometry g,
                      detail::ClassifierCache& cache);
  /// Back-propagates d_logits (N x K). `d_a3` (nullable) receives the
  /// gradient at the block3 activations.
  static void backward(const Classifier& clf, const detail::ClassifierCache& cache,
                       const detail::Mat& d_logits, double* grad, detail::Mat* dx,
                       detail::Mat* d_a3 = nullptr);
};

}  // namespace semguard

#endif  // SEMGUARD_SRC_NN_INTERNAL_HPP_
