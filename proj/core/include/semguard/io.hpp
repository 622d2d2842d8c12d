// Copyright 2026 The semguard Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SEMGUARD_IO_HPP_
#define SEMGUARD_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace semguard {

/// Reads a whole file. Throws PrerequisiteError if it does not exist.
std::string read_file(const std::filesystem::path& path);

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// FNV-1a checksum of a file's contents, as 16 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace semguard

#endif  // SEMGUARD_IO_HPP_
