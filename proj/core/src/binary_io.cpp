// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "semguard/errors.hpp"
#include "semguard/io.hpp"
#include "semguard/rng.hpp"

namespace semguard {
namespace detail {

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
}

void BinaryWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryReader::fail(const std::string& what) const {
  throw FormatError(what, pos_);
}

void BinaryReader::need(std::size_t n, const char* field) {
  if (remaining() < n) {
    fail(std::string("truncated input while reading ") + field);
  }
}

void BinaryReader::expect_magic(std::string_view magic, std::string_view what) {
  if (data_.empty()) fail("empty " + std::string(what) + " file");
  need(magic.size(), "magic");
  if (data_.substr(pos_, magic.size()) != magic) {
    fail("magic mismatch: not a " + std::string(what) + " file");
  }
  pos_ += magic.size();
}

std::uint8_t BinaryReader::u8() {
  need(1, "u8");
  return static_cast<std::uint8_t>(data_[pos_++]);
}

std::uint32_t BinaryReader::u32() {
  need(4, "u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
         << (8 * i);
  }
  pos_ += 4;
  return v;
}

std::uint64_t BinaryReader::u64() {
  need(8, "u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
         << (8 * i);
  }
  pos_ += 8;
  return v;
}

float BinaryReader::f32() { return std::bit_cast<float>(u32()); }
double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::expect_end() const {
  if (remaining() != 0) fail("trailing bytes after payload");
}

}  // namespace detail

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PrerequisiteError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string file_checksum(const std::filesystem::path& path) {
  const std::uint64_t h = fnv1a64(read_file(path));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace semguard
