// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.hpp"

#include <cstdlib>

#include "semguard/rng.hpp"

namespace semguard::testing {

namespace {

void fill_random(std::span<double> params, std::uint64_t seed, double scale) {
  RngStream rng = RngStream(seed).split("fixture");
  for (double& p : params) p = static_cast<float>(scale * (2.0 * rng.next_uniform() - 1.0));
}

}  // namespace

ScoreNetwork random_score_net(std::uint64_t seed, int side, int num_classes) {
  ScoreNetConfig c;
  c.side = side;
  c.width = 6;
  c.blocks = 2;
  c.embed_dim = 8;
  c.num_classes = num_classes;
  c.max_timestep = 50;
  ScoreNetwork net(c, seed);
  fill_random(net.mutable_parameters(), seed, 0.3);
  return net;
}

Classifier random_classifier(std::uint64_t seed, int side, int num_classes) {
  ClassifierConfig c;
  c.side = side;
  c.width1 = 4;
  c.width2 = 5;
  c.width3 = 6;
  c.num_classes = num_classes;
  Classifier clf(c, seed);
  fill_random(clf.mutable_parameters(), seed, 0.4);
  return clf;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("SEMGUARD_TEST_TMP");
  const std::filesystem::path base =
      root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "semguard_tests";
  const std::filesystem::path dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

RunConfig tiny_run_config(const std::filesystem::path& dir) {
  RunConfig c;
  c.paths.output_dir = dir.string();
  c.data.image_side = 8;
  c.data.per_class_count = {12, 6, 4};
  c.diffusion_steps = 20;
  c.score_net.width = 4;
  c.score_net.blocks = 1;
  c.score_net.embed_dim = 8;
  c.classifier_net.width1 = 4;
  c.classifier_net.width2 = 4;
  c.classifier_net.width3 = 4;
  c.score_train.epochs = 1;
  c.score_train.batch_size = 16;
  c.classifier_train.epochs = 2;
  c.classifier_train.batch_size = 16;
  c.detector.tau_length = 5;
  c.aes.calibration_per_class = 2;
  c.detect.per_class_limit = 2;
  c.diagnose.per_class_limit = 1;
  c.diagnose.tau_lengths = {2, 5};
  c.diagnose.timestep_grid_points = 2;
  // Re-derive the network shapes from the data section.
  apply_override(c, "data.image_side=8");
  apply_override(c, "schedule.steps=20");
  return c;
}

}  // namespace semguard::testing
