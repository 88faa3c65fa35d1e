#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace stockcnn::io {

/// Writes to `<path>.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

} // namespace stockcnn::io
