#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace harvest::text {

std::string to_lower(std::string_view s);

/// Collapses runs of ASCII whitespace (and U+00A0) to one space and trims.
std::string normalize_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

/// Splits on runs of whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view s);

/// Lowercased maximal runs of letters/digits. Bytes >= 0x80 count as letters
/// so UTF-8 words stay intact.
std::vector<std::string> word_tokens(std::string_view s);

/// Lines split on \n with a trailing \r removed; views into `s`.
std::vector<std::string_view> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

}  // namespace harvest::text
