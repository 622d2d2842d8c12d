// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_IMAGE_HPP_
#define SEMGUARD_IMAGE_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace semguard {

/// Channel-major (C, H, W) pixel grid. Values are nominally in [0, 1] for
/// clean images; diffused states x_t live in the same container.
class Image {
 public:
  Image() = default;
  Image(int channels, int height, int width, double fill = 0.0);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Image& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }

  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> pixels() { return data_; }
  std::span<const double> pixels() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

Image operator+(Image lhs, const Image& rhs);
Image operator-(Image lhs, const Image& rhs);
Image operator*(Image lhs, double s);
Image operator*(double s, Image rhs);

/// a * x + b * y, elementwise. Throws ArgumentError on shape mismatch.
Image linear_combination(double a, const Image& x, double b, const Image& y);

/// Throws ArgumentError naming `what` unless the shapes agree.
void require_same_shape(const Image& a, const Image& b, const char* what);

/// Rounds every pixel to the nearest float32 value (stored back as double).
void snap_to_float32(Image& image);

double mean_value(const Image& image);

}  // namespace semguard

#endif  // SEMGUARD_IMAGE_HPP_
