#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace harvest::csv {

/// RFC 4180 reader: quoted fields may hold commas, quotes ("") and newlines.
/// Accepts LF or CRLF. A trailing newline does not produce an empty row.
std::vector<std::vector<std::string>> parse(std::string_view content);

std::string quote(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace harvest::csv
