#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sediment {

std::string read_file(const std::filesystem::path& file);

// Plain write, creating parent directories. Not atomic; journal commits use
// write_file_atomic instead.
void write_file(const std::filesystem::path& file, const std::string& content);

// Write-to-temp-then-rename in the target directory, fsynced before rename.
// Readers see either the old bytes or the new bytes, never a partial file.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

// Durable append of one line (adds the trailing newline) with fsync.
void append_line_durable(const std::filesystem::path& file, const std::string& line);

// Regular files directly inside dir, sorted by path. Empty if dir is missing.
std::vector<std::filesystem::path> list_files_sorted(const std::filesystem::path& dir);

// Recursive variant.
std::vector<std::filesystem::path> list_files_recursive_sorted(const std::filesystem::path& dir);

}  // namespace sediment
