// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_RNG_HPP_
#define SEMGUARD_RNG_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace semguard {

/// Counter-based, splittable random stream.
///
/// A stream is identified by its root seed and the path of labels used to
/// split it. The path is hashed into a 64-bit key; draws are
/// mix(key + counter), so siblings never share state and adding a consumer
/// elsewhere in the tree does not shift any existing stream. Streams are
/// values: copy or split before handing one to another worker.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Child stream for `label` (and an optional integer index, e.g. the
  /// sample id). The parent's draw counter does not affect the child.
  RngStream split(std::string_view label, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform();
  /// Standard normal via Box-Muller on two uniforms.
  double next_gaussian();
  /// Uniform integer on [0, n). n must be positive.
  int next_index(int n);
  /// Uniform on [lo, hi).
  double next_range(double lo, double hi);

  std::uint64_t seed() const { return seed_; }
  const std::vector<std::string>& path() const { return path_; }

  // UniformRandomBitGenerator surface, for std algorithms that only need
  // raw bits.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::vector<std::string> path_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit finalizer from SplitMix64.
std::uint64_t mix64(std::uint64_t z);

/// FNV-1a over bytes; used for path hashing and artifact checksums.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace semguard

#endif  // SEMGUARD_RNG_HPP_
