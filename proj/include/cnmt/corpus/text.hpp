#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cnmt::corpus {

using Tokens = std::vector<std::string>;

/// Punctuation normalisation. Mapping table:
///   U+201C U+201D U+201E U+201F U+00AB U+00BB  -> "
///   U+2018 U+2019 U+201A U+201B                -> '
///   U+2013 U+2014                              -> -
///   U+2026                                     -> ...
///   U+00A0 U+202F, tab                         -> space
/// Runs of spaces collapse to one; leading/trailing spaces are trimmed.
/// Ill-formed UTF-8 bytes are copied through unchanged.
std::string normalize_punct(std::string_view line);

/// Tokenizer rules:
///   1. The line must be valid UTF-8, otherwise InputError naming line_no.
///   2. Split on ASCII whitespace.
///   3. From each chunk, punctuation units are detached from the front and
///      the back. Punctuation is  . , ; : ! ? " ( )  and a unit is a maximal
///      run of '.' or a single other punctuation character.
///   4. The remaining core is one token; hyphens, apostrophes and inner
///      punctuation stay in place ("well-known", "don't", "3.5").
Tokens tokenize(std::string_view line, std::size_t line_no = 0);

std::string join(const Tokens& tokens, std::string_view sep = " ");

/// Splits an already-tokenized line on single spaces (empty line -> []).
Tokens split_tokens(std::string_view line);

} // namespace cnmt::corpus
