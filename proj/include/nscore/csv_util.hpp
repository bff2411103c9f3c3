#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nscore {

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_double(double v);

std::vector<std::string_view> split_csv_line(std::string_view line);

/// Writes content to a sibling temp file, then renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace nscore
