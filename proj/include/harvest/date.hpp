#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace harvest {

/// Proleptic Gregorian calendar date; ISO-8601 (YYYY-MM-DD) on the wire.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    static std::optional<Date> parse(std::string_view iso);
    /// Throws ArgumentError for anything that is not a valid YYYY-MM-DD.
    static Date from_iso(std::string_view iso);
    std::string iso() const;
    bool valid() const;

    auto operator<=>(const Date&) const = default;
};

}  // namespace harvest
