#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace stcorpus {

/// Whole-file read. Throws MissingInputError if absent, IoError otherwise.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace stcorpus
