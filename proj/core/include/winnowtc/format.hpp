// Text helpers shared by the file formats: exact double round-tripping,
// strict numeric parsing and the FNV-1a content hash.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace winnowtc {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Throws std::invalid_argument unless the whole of `text` is a number.
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

}  // namespace winnowtc
