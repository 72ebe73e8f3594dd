#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace arqa::utf8 {

// Decodes UTF-8 into code points. Invalid byte sequences decode to U+FFFD
// (one replacement per bad byte) so offsets stay aligned with the input.
std::vector<char32_t> decode(std::string_view s);

std::string encode(const std::vector<char32_t>& cps);
void append(std::string& out, char32_t cp);

// Number of code points in s.
std::size_t length(std::string_view s);

// Byte offset of the code point at index cp_index; cp_index == length(s)
// maps to s.size().
std::size_t byte_offset(std::string_view s, std::size_t cp_index);

// Code-point slice, clamped to the end of the string.
std::string substr(std::string_view s, std::size_t pos, std::size_t count);

} // namespace arqa::utf8
