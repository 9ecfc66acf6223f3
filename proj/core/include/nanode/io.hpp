#pragma once

// Small text-output helpers shared by CSV/JSON writers.

#include <filesystem>
#include <string>
#include <string_view>

namespace nanode {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace nanode
