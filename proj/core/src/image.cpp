// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/image.hpp"

#include <numeric>
#include <string>

#include "semguard/errors.hpp"

namespace semguard {

Image::Image(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    throw ArgumentError("Image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(what) + ": image shape mismatch (" +
                        std::to_string(a.channels()) + "x" +
                        std::to_string(a.height()) + "x" +
                        std::to_string(a.width()) + " vs " +
                        std::to_string(b.channels()) + "x" +
                        std::to_string(b.height()) + "x" +
                        std::to_string(b.width()) + ")");
  }
}

Image& Image::operator+=(const Image& rhs) {
  require_same_shape(*this, rhs, "Image::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  require_same_shape(*this, rhs, "Image::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Image operator+(Image lhs, const Image& rhs) { return lhs += rhs; }
Image operator-(Image lhs, const Image& rhs) { return lhs -= rhs; }
Image operator*(Image lhs, double s) { return lhs *= s; }
Image operator*(double s, Image rhs) { return rhs *= s; }

Image linear_combination(double a, const Image& x, double b, const Image& y) {
  require_same_shape(x, y, "linear_combination");
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

void snap_to_float32(Image& image) {
  for (double& v : image.pixels()) v = static_cast<double>(static_cast<float>(v));
}

double mean_value(const Image& image) {
  if (image.empty()) return 0.0;
  return std::accumulate(image.pixels().begin(), image.pixels().end(), 0.0) /
         static_cast<double>(image.size());
}

}  // namespace semguard
