// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_ERRORS_HPP_
#define SEMGUARD_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: wrong shape, out-of-range timestep, bad label.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration (dataset spec, run config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Binary file could not be decoded. `offset()` is the byte position at
/// which decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// A pipeline stage was asked to run before the artifacts it consumes exist
/// (or after they were modified behind the manifest's back).
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace semguard

#endif  // SEMGUARD_ERRORS_HPP_
