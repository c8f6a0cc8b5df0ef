#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace discursive::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and renames, so readers never observe a
/// half-written artifact.
void write_file(const std::filesystem::path& path, std::string_view content);

void ensure_directory(const std::filesystem::path& dir);

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> lines(std::string_view text);
std::string_view trim(std::string_view text);

/// Prefixes every line with "# " (provenance headers in text artifacts).
std::string comment_block(std::string_view text);
/// Lines that are neither empty nor '#' comments.
std::vector<std::string> data_lines(std::string_view text);

}  // namespace discursive::io
