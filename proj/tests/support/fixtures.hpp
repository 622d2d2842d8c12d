// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_TESTS_SUPPORT_FIXTURES_HPP_
#define SEMGUARD_TESTS_SUPPORT_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "semguard/config.hpp"
#include "semguard/nn.hpp"

namespace semguard::testing {

/// Small score network whose parameters (including the zero-initialized
/// output layer) are filled with random values.
ScoreNetwork random_score_net(std::uint64_t seed, int side = 8, int num_classes = 3);
Classifier random_classifier(std::uint64_t seed, int side = 8, int num_classes = 3);

/// Fresh, empty directory under the test scratch root.
std::filesystem::path scratch_dir(const std::string& name);

/// Reference-shaped config shrunk to run in seconds.
RunConfig tiny_run_config(const std::filesystem::path& dir);

}  // namespace semguard::testing

#endif  // SEMGUARD_TESTS_SUPPORT_FIXTURES_HPP_
