// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "semguard/rng.hpp"

#include <cmath>
#include <numbers>

#include "semguard/errors.hpp"

namespace semguard {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

RngStream::RngStream(std::uint64_t seed)
    : seed_(seed), key_(mix64(seed ^ 0x5eed5eed5eed5eedULL)) {}

RngStream RngStream::split(std::string_view label, std::uint64_t index) const {
  RngStream child(*this);
  child.path_.emplace_back(std::string(label) + "#" + std::to_string(index));
  child.key_ = mix64(key_ ^ mix64(fnv1a64(label) + kGolden * (index + 1)));
  child.counter_ = 0;
  child.has_spare_ = false;
  return child;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + kGolden * counter_);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

int RngStream::next_index(int n) {
  if (n <= 0) throw ArgumentError("next_index: n must be positive");
  return static_cast<int>(next_uniform() * n);
}

double RngStream::next_range(double lo, double hi) {
  return lo + (hi - lo) * next_uniform();
}

}  // namespace semguard
