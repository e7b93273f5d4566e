#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kennel::textio {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

double parse_double(std::string_view token, std::string_view context);
std::int64_t parse_int(std::string_view token, std::string_view context);
std::uint64_t parse_uint(std::string_view token, std::string_view context);

std::vector<std::string_view> split_ws(std::string_view line);

struct Line {
  std::size_t number;  // 1-based
  std::string text;
};

/// Reads a text file, dropping blank lines and lines whose first
/// non-space character is '#'. Throws `io.missing` if the file cannot be opened.
std::vector<Line> read_data_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories. Throws `io.write`.
void write_file(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

}  // namespace kennel::textio
