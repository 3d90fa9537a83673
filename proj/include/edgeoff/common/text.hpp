/**
 * @file text.hpp
 * @brief Locale-independent number formatting and small string helpers.
 */
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edgeoff {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

/// Strict full-string parses; return false instead of throwing.
bool parse_double(std::string_view text, double& out);
bool parse_u64(std::string_view text, std::uint64_t& out);
bool parse_i64(std::string_view text, std::int64_t& out);

}  // namespace edgeoff
