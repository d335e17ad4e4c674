#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace emscore::text {

/// Splits on a single delimiter character; empty fields are kept.
std::vector<std::string_view> split(std::string_view line, char delim);

/// Splits on runs of spaces and tabs; empty fields are dropped.
std::vector<std::string_view> split_whitespace(std::string_view line);

std::string_view trim(std::string_view s);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict parsers: the whole field must be consumed. Throw Error(kParseError).
double parse_double(std::string_view field, std::string_view context);
long long parse_int(std::string_view field, std::string_view context);

/// Reads a whole file; throws Error(kIoError) if it cannot be opened.
std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace emscore::text
