#pragma once

#include <filesystem>
#include <string>

namespace sediment {

// Hex-encoded SHA-256, prefixed "sha256:". Stable across platforms; used for
// manifest delta detection and test-side tree snapshots.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& file);

// Digest of a directory tree: sorted relative paths plus per-file digests.
// Two trees hash equal iff they contain identical files with identical bytes.
std::string hash_tree(const std::filesystem::path& dir);

}  // namespace sediment
