#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace torapp::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

/// Throws ParseError unless the whole field is a number.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);
unsigned long long parse_uint(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep);

/// Split on runs of spaces/tabs, dropping empty tokens.
std::vector<std::string_view> tokenize(std::string_view line);

/// Parse `key=value` tokens; unknown keys are kept, duplicates rejected.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view line);

} // namespace torapp::text
