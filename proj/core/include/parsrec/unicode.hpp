#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace parsrec::uni {

// UTF-8 decoding is lenient: malformed bytes decode to U+FFFD so that noisy
// reference strings never abort a pipeline stage.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// Letter/digit/case classification backed by code-point tables for the
// Latin, Greek and Cyrillic blocks. Code points outside the tables are
// treated as neither letters nor digits.
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
bool is_combining_mark(char32_t cp);
bool is_space(char32_t cp);

// Single forward pass of canonical composition: a starter followed by a
// combining mark is replaced by its precomposed form when one exists
// ("e" + U+0301 -> U+00E9). Already-composed text passes through unchanged.
std::vector<char32_t> compose_canonical(const std::vector<char32_t>& cps);

}  // namespace parsrec::uni
