#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace datavideo {

std::string sha256_hex(std::string_view data);

// Throws Error(io_error) if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace datavideo
