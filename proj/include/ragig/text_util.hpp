#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ragig {

constexpr bool is_ascii_digit(char c) noexcept { return c >= '0' && c <= '9'; }

/// Parses a run of ASCII digits, saturating at INT64_MAX.
std::int64_t parse_index_saturating(std::string_view digits) noexcept;

std::string_view trim(std::string_view s) noexcept;

void replace_all(std::string& s, std::string_view from, std::string_view to);

/// Throws IOFailure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD, one per byte.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

/// Number of code points.
std::size_t utf8_length(std::string_view s);

/// First / last `max_chars` code points of `s`.
std::string utf8_head(std::string_view s, std::size_t max_chars);
std::string utf8_tail(std::string_view s, std::size_t max_chars);

}  // namespace ragig
