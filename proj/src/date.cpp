#include "harvest/date.hpp"

#include <charconv>
#include <cstdio>

#include "harvest/error.hpp"

namespace harvest {

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : kDays[m - 1];
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

bool Date::valid() const {
    return year >= 1 && year <= 9999 && month >= 1 && month <= 12 && day >= 1 &&
           day <= days_in_month(year, month);
}

std::optional<Date> Date::parse(std::string_view iso) {
    // Accept a trailing time component ("2021-01-31T10:00:00Z").
    if (iso.size() > 10 && (iso[10] == 'T' || iso[10] == ' ')) iso = iso.substr(0, 10);
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    Date d;
    if (!parse_int(iso.substr(0, 4), d.year) || !parse_int(iso.substr(5, 2), d.month) ||
        !parse_int(iso.substr(8, 2), d.day))
        return std::nullopt;
    if (!d.valid()) return std::nullopt;
    return d;
}

Date Date::from_iso(std::string_view iso) {
    auto d = parse(iso);
    if (!d) throw ArgumentError("invalid ISO date: '" + std::string(iso) + "'");
    return *d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

}  // namespace harvest
