#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cnmt::corpus {

/// Decodes one code point starting at text[pos]; advances pos. Returns
/// nullopt (pos unchanged) on an ill-formed sequence, overlong form, or
/// surrogate.
std::optional<char32_t> decode_one(std::string_view text, std::size_t& pos);

bool is_valid_utf8(std::string_view text);

std::string encode_utf8(char32_t cp);

/// Splits valid UTF-8 into one string per code point.
std::vector<std::string> split_code_points(std::string_view text);

/// Lowercases ASCII and Latin-1 Supplement letters; everything else passes
/// through unchanged.
std::string to_lower(std::string_view text);

} // namespace cnmt::corpus
