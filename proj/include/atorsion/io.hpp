#pragma once

#include <filesystem>
#include <string>

namespace atorsion {

/// %.17g, the CSV number format.
std::string format_double(double v);

/// Writes content to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace atorsion
