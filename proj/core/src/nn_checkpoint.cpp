// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint layout (little endian):
//   "SGCK" | u32 version | u32 kind tag | u32 hyperparameter count |
//   u32 hyperparameters... | u64 parameter count | f32 parameters...

#include <string>
#include <vector>

#include "binary_io.hpp"
#include "nn_internal.hpp"
#include "semguard/errors.hpp"
#include "semguard/io.hpp"

namespace semguard {
namespace {

constexpr std::string_view kMagic = "SGCK";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kScoreTag = 1;
constexpr std::uint32_t kClassifierTag = 2;

const char* kind_name(std::uint32_t tag) {
  switch (tag) {
    case kScoreTag: return "score-network";
    case kClassifierTag: return "classifier";
    default: return "unknown";
  }
}

std::string encode(std::uint32_t tag, const std::vector<int>& hyper,
                   std::span<const double> params) {
  detail::BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(tag);
  w.u32(static_cast<std::uint32_t>(hyper.size()));
  for (int h : hyper) w.i32(h);
  w.u64(params.size());
  for (double p : params) w.f32(static_cast<float>(p));
  return w.str();
}

struct Decoded {
  std::vector<int> hyper;
  std::size_t params_offset = 0;
  detail::BinaryReader reader;
};

Decoded decode_header(std::string_view bytes, std::uint32_t expected_tag) {
  detail::BinaryReader r(bytes);
  r.expect_magic(kMagic, "model checkpoint");
  if (const std::uint32_t v = r.u32(); v != kVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(v));
  }
  const std::size_t tag_offset = r.offset();
  const std::uint32_t tag = r.u32();
  if (tag != expected_tag) {
    throw FormatError(std::string("expected a ") + kind_name(expected_tag) +
                          " checkpoint but found kind '" + kind_name(tag) + "'",
                      tag_offset);
  }
  const std::uint32_t n = r.u32();
  if (n > 64) r.fail("implausible hyperparameter count");
  Decoded d{{}, 0, r};
  for (std::uint32_t i = 0; i < n; ++i) d.hyper.push_back(d.reader.i32());
  return d;
}

void read_params(detail::BinaryReader& r, std::span<double> params) {
  const std::size_t offset = r.offset();
  const std::uint64_t count = r.u64();
  if (count != params.size()) {
    throw FormatError("parameter count " + std::to_string(count) +
                          " does not match the architecture (" +
                          std::to_string(params.size()) + ")",
                      offset);
  }
  for (double& p : params) p = r.f32();
  r.expect_end();
}

}  // namespace

std::string serialize_model(const ScoreNetwork& net) {
  const ScoreNetConfig& c = net.config();
  return encode(kScoreTag,
                {c.channels, c.side, c.width, c.blocks, c.embed_dim, c.num_classes,
                 c.max_timestep},
                net.parameters());
}

std::string serialize_model(const Classifier& clf) {
  const ClassifierConfig& c = clf.config();
  return encode(kClassifierTag,
                {c.channels, c.side, c.width1, c.width2, c.width3, c.num_classes},
                clf.parameters());
}

ScoreNetwork deserialize_score_network(std::string_view bytes) {
  Decoded d = decode_header(bytes, kScoreTag);
  if (d.hyper.size() != 7) d.reader.fail("score-network header needs 7 hyperparameters");
  const ScoreNetConfig c{d.hyper[0], d.hyper[1], d.hyper[2], d.hyper[3],
                         d.hyper[4], d.hyper[5], d.hyper[6]};
  ScoreNetwork net = [&] {
    try {
      return ScoreNetwork(c, 0);
    } catch (const ConfigError& e) {
      d.reader.fail(std::string("invalid architecture: ") + e.what());
    }
  }();
  read_params(d.reader, net.mutable_parameters());
  return net;
}

Classifier deserialize_classifier(std::string_view bytes) {
  Decoded d = decode_header(bytes, kClassifierTag);
  if (d.hyper.size() != 6) d.reader.fail("classifier header needs 6 hyperparameters");
  const ClassifierConfig c{d.hyper[0], d.hyper[1], d.hyper[2],
                           d.hyper[3], d.hyper[4], d.hyper[5]};
  Classifier clf = [&] {
    try {
      return Classifier(c, 0);
    } catch (const ConfigError& e) {
      d.reader.fail(std::string("invalid architecture: ") + e.what());
    }
  }();
  read_params(d.reader, clf.mutable_parameters());
  return clf;
}

void save_model(const ScoreNetwork& net, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(net));
}

void save_model(const Classifier& clf, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(clf));
}

ScoreNetwork load_score_network(const std::filesystem::path& path) {
  return deserialize_score_network(read_file(path));
}

Classifier load_classifier(const std::filesystem::path& path) {
  return deserialize_classifier(read_file(path));
}

}  // namespace semguard
