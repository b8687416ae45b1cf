#pragma once

#include <filesystem>
#include <string>

namespace peum {

// Write to a temporary sibling, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace peum
