#pragma once

#include <string>

namespace mesochain {

/// Shortest "%.17g" rendering; round-trips every double exactly.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

/// Creates `path` (and parents) if missing.
void ensure_directory(const std::string& path);

} // namespace mesochain
