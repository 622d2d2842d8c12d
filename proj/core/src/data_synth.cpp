// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/data_synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>

#include "binary_io.hpp"
#include "semguard/errors.hpp"
#include "semguard/io.hpp"

namespace semguard {
namespace {

constexpr std::string_view kMagic = "SGDS";
constexpr std::uint32_t kVersion = 1;
constexpr int kSubsamples = 8;

// Bounding box area must stay within [0.3, 0.8] of the frame.
const double kMinExtent = std::sqrt(0.3) / 2.0;
const double kMaxExtent = std::sqrt(0.8) / 2.0;

struct StarPolygon {
  std::array<double, 10> u;
  std::array<double, 10> v;
};

const StarPolygon& star_polygon() {
  static const StarPolygon poly = [] {
    StarPolygon p{};
    for (int i = 0; i < 10; ++i) {
      const double r = (i % 2 == 0) ? 1.0 : 0.45;
      const double a = -std::numbers::pi / 2 + i * std::numbers::pi / 5;
      p.u[i] = r * std::cos(a);
      p.v[i] = r * std::sin(a);
    }
    return p;
  }();
  return poly;
}

bool inside_polygon(const StarPolygon& p, double u, double v) {
  bool in = false;
  for (int i = 0, j = 9; i < 10; j = i++) {
    if ((p.v[i] > v) != (p.v[j] > v) &&
        u < (p.u[j] - p.u[i]) * (v - p.v[i]) / (p.v[j] - p.v[i]) + p.u[i]) {
      in = !in;
    }
  }
  return in;
}

}  // namespace

std::string_view shape_name(Shape shape) {
  switch (shape) {
    case Shape::kDisk: return "disk";
    case Shape::kSquare: return "square";
    case Shape::kTriangle: return "triangle";
    case Shape::kCross: return "cross";
    case Shape::kRing: return "ring";
    case Shape::kStar: return "star";
  }
  return "unknown";
}

std::optional<Shape> parse_shape(std::string_view name) {
  for (Shape s : {Shape::kDisk, Shape::kSquare, Shape::kTriangle, Shape::kCross,
                  Shape::kRing, Shape::kStar}) {
    if (shape_name(s) == name) return s;
  }
  return std::nullopt;
}

bool shape_contains(Shape shape, double u, double v) {
  switch (shape) {
    case Shape::kDisk:
      return u * u + v * v <= 1.0;
    case Shape::kSquare:
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
    case Shape::kTriangle:
      // Apex at the top, base along v = 1.
      return v >= -1.0 && v <= 1.0 && std::abs(u) <= (v + 1.0) / 2.0;
    case Shape::kCross:
      return (std::abs(u) <= 0.34 && std::abs(v) <= 1.0) ||
             (std::abs(v) <= 0.34 && std::abs(u) <= 1.0);
    case Shape::kRing: {
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.36;
    }
    case Shape::kStar:
      return inside_polygon(star_polygon(), u, v);
  }
  return false;
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

std::optional<Split> parse_split(std::string_view name) {
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    if (split_name(s) == name) return s;
  }
  return std::nullopt;
}

DatasetSpec DatasetSpec::reference() {
  DatasetSpec spec;
  spec.ind_classes = {{0, Shape::kDisk}, {1, Shape::kSquare},
                      {2, Shape::kTriangle}, {3, Shape::kCross}};
  spec.ood_classes = {{4, Shape::kRing}, {5, Shape::kStar}};
  return spec;
}

void DatasetSpec::validate() const {
  if (image_side < 4) throw ConfigError("data.image_side must be >= 4");
  if (channels != 1 && channels != 3) throw ConfigError("data.channels must be 1 or 3");
  if (ind_classes.empty()) throw ConfigError("at least one InD class is required");
  if (per_class_count.train < 1 || per_class_count.val < 1 || per_class_count.test < 1) {
    throw ConfigError("per-class counts must be >= 1");
  }
  std::set<int> ids;
  std::set<Shape> shapes;
  for (std::size_t i = 0; i < ind_classes.size(); ++i) {
    if (ind_classes[i].id != static_cast<int>(i)) {
      throw ConfigError("InD class ids must be contiguous from 0");
    }
    ids.insert(ind_classes[i].id);
    shapes.insert(ind_classes[i].shape);
  }
  for (std::size_t i = 0; i < ood_classes.size(); ++i) {
    const ShapeClass& c = ood_classes[i];
    if (ids.count(c.id) || shapes.count(c.shape)) {
      throw ConfigError("InD and OOD class sets overlap (id " + std::to_string(c.id) +
                        ", " + std::string(shape_name(c.shape)) + ")");
    }
    if (c.id != static_cast<int>(ind_classes.size() + i)) {
      throw ConfigError("OOD class ids must continue contiguously after the InD ids");
    }
    shapes.insert(c.shape);
  }
  const Jitter& j = jitter;
  if (!(j.extent_min <= j.extent_max)) throw ConfigError("jitter extent range is empty");
  if (j.extent_min < kMinExtent - 1e-12 || j.extent_max > kMaxExtent + 1e-12) {
    throw ConfigError("jitter extent must keep the shape between 30% and 80% of the frame");
  }
  if (j.shift < 0.0 || j.shift > 1.0) {
    throw ConfigError("jitter shift must lie in [0, 1] to keep shapes inside the frame");
  }
  if (!(j.foreground_min <= j.foreground_max) || !(j.background_min <= j.background_max) ||
      j.background_min < 0.0 || j.foreground_max > 1.0 ||
      j.background_max >= j.foreground_min) {
    throw ConfigError("intensity ranges must lie in [0,1] with background below foreground");
  }
}

std::vector<std::size_t> Dataset::indices(Split split,
                                          std::optional<Distribution> dist) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].split == split && (!dist || items[i].distribution == *dist)) {
      out.push_back(i);
    }
  }
  return out;
}

ShapeDraw draw_shape_params(const DatasetSpec& spec, RngStream& rng) {
  const Jitter& j = spec.jitter;
  const double side = spec.image_side;
  ShapeDraw d;
  d.extent = side * rng.next_range(j.extent_min, j.extent_max);
  if (j.extent_max == j.extent_min) d.extent = side * j.extent_min;
  if (2.0 * d.extent < 3.0) {
    throw ConfigError("shape smaller than 3 px at image_side " +
                      std::to_string(spec.image_side));
  }
  const double room = std::max(0.0, side / 2.0 - d.extent) * j.shift;
  d.center_x = side / 2.0 + rng.next_range(-room, room);
  d.center_y = side / 2.0 + rng.next_range(-room, room);
  const double fg = rng.next_range(j.foreground_min, j.foreground_max);
  for (double& f : d.foreground) f = fg;
  if (spec.channels == 3) {
    for (double& f : d.foreground) f = fg * rng.next_range(0.8, 1.0);
  }
  d.background = rng.next_range(j.background_min, j.background_max);
  return d;
}

Image render_shape(Shape shape, const ShapeDraw& draw, int side, int channels) {
  Image img(channels, side, side);
  const double inv = 1.0 / draw.extent;
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSubsamples; ++sy) {
        const double py = y + (sy + 0.5) / kSubsamples;
        for (int sx = 0; sx < kSubsamples; ++sx) {
          const double px = x + (sx + 0.5) / kSubsamples;
          if (shape_contains(shape, (px - draw.center_x) * inv, (py - draw.center_y) * inv)) {
            ++hits;
          }
        }
      }
      const double coverage = hits / double(kSubsamples * kSubsamples);
      for (int c = 0; c < channels; ++c) {
        img.at(c, y, x) = draw.background + (draw.foreground[c] - draw.background) * coverage;
      }
    }
  }
  snap_to_float32(img);
  return img;
}

Image generate_image(const DatasetSpec& spec, const ShapeClass& cls, RngStream rng) {
  const ShapeDraw d = draw_shape_params(spec, rng);
  return render_shape(cls.shape, d, spec.image_side, spec.channels);
}

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  const RngStream root = RngStream(spec.seed).split("data");
  auto emit = [&](Split split, const ShapeClass& cls, Distribution dist, int count) {
    const RngStream stream = root.split(split_name(split)).split(shape_name(cls.shape));
    for (int i = 0; i < count; ++i) {
      ds.items.push_back({generate_image(spec, cls, stream.split("image", i)), cls.id,
                          split, dist});
    }
  };
  for (const ShapeClass& c : spec.ind_classes) {
    emit(Split::kTrain, c, Distribution::kInD, spec.per_class_count.train);
  }
  for (const ShapeClass& c : spec.ind_classes) {
    emit(Split::kVal, c, Distribution::kInD, spec.per_class_count.val);
  }
  for (const ShapeClass& c : spec.ind_classes) {
    emit(Split::kTest, c, Distribution::kInD, spec.per_class_count.test);
  }
  for (const ShapeClass& c : spec.ood_classes) {
    emit(Split::kTest, c, Distribution::kOOD, spec.per_class_count.test);
  }
  return ds;
}

std::string serialize_dataset(const Dataset& dataset) {
  const DatasetSpec& s = dataset.spec;
  detail::BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(s.image_side));
  w.u32(static_cast<std::uint32_t>(s.channels));
  for (const auto* classes : {&s.ind_classes, &s.ood_classes}) {
    w.u32(static_cast<std::uint32_t>(classes->size()));
    for (const ShapeClass& c : *classes) {
      w.i32(c.id);
      w.u8(static_cast<std::uint8_t>(c.shape));
    }
  }
  w.u32(static_cast<std::uint32_t>(s.per_class_count.train));
  w.u32(static_cast<std::uint32_t>(s.per_class_count.val));
  w.u32(static_cast<std::uint32_t>(s.per_class_count.test));
  const Jitter& j = s.jitter;
  for (double v : {j.extent_min, j.extent_max, j.shift, j.foreground_min,
                   j.foreground_max, j.background_min, j.background_max}) {
    w.f64(v);
  }
  w.u64(s.seed);
  w.u64(dataset.items.size());
  for (const LabeledImage& item : dataset.items) {
    for (double v : item.pixels.pixels()) w.f32(static_cast<float>(v));
  }
  for (const LabeledImage& item : dataset.items) {
    w.i32(item.label);
    w.u8(static_cast<std::uint8_t>(item.split));
    w.u8(static_cast<std::uint8_t>(item.distribution));
  }
  return w.str();
}

Dataset deserialize_dataset(std::string_view bytes) {
  detail::BinaryReader r(bytes);
  r.expect_magic(kMagic, "dataset");
  if (const std::uint32_t v = r.u32(); v != kVersion) {
    r.fail("unsupported dataset version " + std::to_string(v));
  }
  Dataset ds;
  DatasetSpec& s = ds.spec;
  s.image_side = static_cast<int>(r.u32());
  s.channels = static_cast<int>(r.u32());
  if (s.image_side <= 0 || s.image_side > 4096 || (s.channels != 1 && s.channels != 3)) {
    r.fail("implausible image geometry in header");
  }
  for (auto* classes : {&s.ind_classes, &s.ood_classes}) {
    const std::uint32_t n = r.u32();
    if (n > 64) r.fail("implausible class count " + std::to_string(n));
    for (std::uint32_t i = 0; i < n; ++i) {
      ShapeClass c;
      c.id = r.i32();
      const std::uint8_t code = r.u8();
      if (code > static_cast<std::uint8_t>(Shape::kStar)) r.fail("unknown shape code");
      c.shape = static_cast<Shape>(code);
      classes->push_back(c);
    }
  }
  s.per_class_count.train = static_cast<int>(r.u32());
  s.per_class_count.val = static_cast<int>(r.u32());
  s.per_class_count.test = static_cast<int>(r.u32());
  Jitter& j = s.jitter;
  for (double* v : {&j.extent_min, &j.extent_max, &j.shift, &j.foreground_min,
                    &j.foreground_max, &j.background_min, &j.background_max}) {
    *v = r.f64();
  }
  s.seed = r.u64();
  const std::uint64_t count = r.u64();
  const std::size_t pixels =
      static_cast<std::size_t>(s.image_side) * s.image_side * s.channels;
  if (count > r.remaining() / (pixels * 4 + 6) + 1) {
    r.fail("item count " + std::to_string(count) + " exceeds file size");
  }
  ds.items.resize(count);
  for (LabeledImage& item : ds.items) {
    item.pixels = Image(s.channels, s.image_side, s.image_side);
    for (double& v : item.pixels.pixels()) v = r.f32();
  }
  for (LabeledImage& item : ds.items) {
    item.label = r.i32();
    const std::uint8_t split = r.u8();
    const std::uint8_t dist = r.u8();
    if (split > 2 || dist > 1) r.fail("invalid split/distribution code in label table");
    item.split = static_cast<Split>(split);
    item.distribution = static_cast<Distribution>(dist);
  }
  r.expect_end();
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(read_file(path));
}

}  // namespace semguard
