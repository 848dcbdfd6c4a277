#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace robustcalib::io {

// Shortest-safe decimal form: 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);
double parse_double(std::string_view text);  // throws std::invalid_argument

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace robustcalib::io
