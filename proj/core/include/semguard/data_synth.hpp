// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_DATA_SYNTH_HPP_
#define SEMGUARD_DATA_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semguard/image.hpp"
#include "semguard/rng.hpp"

namespace semguard {

enum class Shape : std::uint8_t { kDisk, kSquare, kTriangle, kCross, kRing, kStar };

std::string_view shape_name(Shape shape);
/// Parses one of disk, square, triangle, cross, ring, star.
std::optional<Shape> parse_shape(std::string_view name);

/// Point-membership test in normalized shape coordinates, where the shape's
/// bounding box is [-1, 1]^2 (y grows downwards).
bool shape_contains(Shape shape, double u, double v);

struct ShapeClass {
  int id = 0;
  Shape shape = Shape::kDisk;
  friend bool operator==(const ShapeClass&, const ShapeClass&) = default;
};

/// Per-image random variation. `extent_*` is the half side of the shape's
/// bounding box as a fraction of the image side, so the bounding box covers
/// (2 * extent)^2 of the frame area. `shift` scales the centre offset within
/// the room left by the extent (1 = anywhere the shape still fits).
struct Jitter {
  double extent_min = 0.30;
  double extent_max = 0.42;
  double shift = 1.0;
  double foreground_min = 0.75;
  double foreground_max = 1.0;
  double background_min = 0.0;
  double background_max = 0.15;
  friend bool operator==(const Jitter&, const Jitter&) = default;
};

struct SplitCounts {
  int train = 500;
  int val = 100;
  int test = 100;
  friend bool operator==(const SplitCounts&, const SplitCounts&) = default;
};

struct DatasetSpec {
  int image_side = 16;
  int channels = 1;
  std::vector<ShapeClass> ind_classes;
  std::vector<ShapeClass> ood_classes;
  SplitCounts per_class_count;
  Jitter jitter;
  std::uint64_t seed = 20260401;

  /// 16x16 grey, InD {disk, square, triangle, cross}, OOD {ring, star}.
  static DatasetSpec reference();
  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

enum class Split : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };
enum class Distribution : std::uint8_t { kInD = 0, kOOD = 1 };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

struct LabeledImage {
  Image pixels;
  int label = 0;
  Split split = Split::kTrain;
  Distribution distribution = Distribution::kInD;
  friend bool operator==(const LabeledImage&, const LabeledImage&) = default;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<LabeledImage> items;

  /// Indices of items in `split`, optionally restricted to one distribution.
  std::vector<std::size_t> indices(Split split,
                                   std::optional<Distribution> dist = {}) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Geometry and intensities of one rendered shape, in pixel units.
struct ShapeDraw {
  double center_x = 0.0;
  double center_y = 0.0;
  double extent = 0.0;
  double foreground[3] = {1.0, 1.0, 1.0};
  double background = 0.0;
};

/// Draws the jitter parameters for one image. Throws ConfigError when the
/// shape would be smaller than 3 px at this resolution.
ShapeDraw draw_shape_params(const DatasetSpec& spec, RngStream& rng);

/// Anti-aliased rasterization (coverage from an 8x8 subpixel grid), pixels
/// rounded to float32.
Image render_shape(Shape shape, const ShapeDraw& draw, int side, int channels);

Image generate_image(const DatasetSpec& spec, const ShapeClass& cls, RngStream rng);

Dataset generate_dataset(const DatasetSpec& spec);

std::string serialize_dataset(const Dataset& dataset);
Dataset deserialize_dataset(std::string_view bytes);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace semguard

#endif  // SEMGUARD_DATA_SYNTH_HPP_
