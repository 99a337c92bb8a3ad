#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace clsid {

/// Writes @p content to a temporary file next to @p path and renames it into
/// place, so readers never observe a partial file. Creates missing parent
/// directories. Throws Error on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole file as a string; Error if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace clsid
