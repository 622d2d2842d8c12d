// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

// Little-endian binary encoding shared by the dataset and checkpoint formats.

#ifndef SEMGUARD_SRC_BINARY_IO_HPP_
#define SEMGUARD_SRC_BINARY_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace semguard::detail {

class BinaryWriter {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

/// Sequential reader; every failure throws FormatError carrying the offset
/// of the field that could not be decoded.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}
  void expect_magic(std::string_view magic, std::string_view what);
  std::uint8_t u8();
  std::uint32_t u32();
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64();
  float f32();
  double f64();
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  [[noreturn]] void fail(const std::string& what) const;
  void expect_end() const;

 private:
  void need(std::size_t n, const char* field);
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace semguard::detail

#endif  // SEMGUARD_SRC_BINARY_IO_HPP_
