#pragma once

// Small text I/O helpers shared by the dataset, landscape and report code.

#include <cstddef>
#include <string>
#include <vector>

namespace prospero {

/// Comma-separated rows; blank lines and lines starting with '#' are skipped.
/// Fields are trimmed. No quoting: none of our formats need it.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Throws ParseError naming `line`.
double parse_double_field(const std::string& field, std::size_t line);

/// Shortest representation that round-trips.
std::string format_double(double value);

/// Throws IoError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace prospero
