#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ttpx::io {

// Whole-file read. Throws IoError.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, flushes, then renames over `path`.
// Readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Stable 64-bit FNV-1a, used for fingerprints and feature hashing.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

} // namespace ttpx::io
