#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace retopt {

// Shortest decimal form that round-trips the exact double value.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
bool parse_bool(std::string_view text);

std::string read_file(const std::string& path);
// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace retopt
