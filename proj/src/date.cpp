#include "dwe/date.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "dwe/text.hpp"

namespace dwe {

using namespace std::chrono;

bool is_valid_date(int y, unsigned m, unsigned d) {
    if (y < 1 || y > 9999) return false;
    return year_month_day{year{y}, month{m}, day{d}}.ok();
}

Date::Date(int y, unsigned m, unsigned d)
    : ymd_{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}} {
    if (!is_valid_date(y, m, d)) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "invalid calendar date %04d-%02u-%02u", y, m, d);
        throw DateError(buf);
    }
}

Date::Date(std::chrono::sys_days days) : ymd_{days} {}

int Date::iso_weekday() const {
    return static_cast<int>(weekday{sys_days()}.iso_encoding());
}

int Date::day_of_year() const {
    const std::chrono::sys_days jan1{ymd_.year() / January / 1};
    return static_cast<int>((sys_days() - jan1).count()) + 1;
}

Date Date::plus_days(long n) const { return Date{sys_days() + days{n}}; }

long Date::days_since(const Date& other) const {
    return static_cast<long>((sys_days() - other.sys_days()).count());
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

namespace {

bool parse_fixed_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

}  // namespace

Date parse_iso_date(std::string_view text) {
    const auto t = trim(text);
    int y = 0, m = 0, d = 0;
    if (t.size() != 10 || t[4] != '-' || t[7] != '-' || !parse_fixed_int(t.substr(0, 4), y) ||
        !parse_fixed_int(t.substr(5, 2), m) || !parse_fixed_int(t.substr(8, 2), d)) {
        throw DateError("expected YYYY-MM-DD, got '" + std::string(t) + "'");
    }
    if (!is_valid_date(y, static_cast<unsigned>(m), static_cast<unsigned>(d)))
        throw DateError("invalid calendar date '" + std::string(t) + "'");
    return Date{y, static_cast<unsigned>(m), static_cast<unsigned>(d)};
}

std::optional<Date> parse_optional_iso_date(std::string_view text) {
    if (trim(text).empty()) return std::nullopt;
    return parse_iso_date(text);
}

unsigned month_from_name(std::string_view name) {
    static constexpr std::array<std::string_view, 12> kNames = {
        "january", "february", "march",     "april",   "may",      "june",
        "july",    "august",   "september", "october", "november", "december"};
    std::string n = to_lower(trim(name));
    if (!n.empty() && n.back() == '.') n.pop_back();
    if (n.size() < 3) return 0;
    if (n == "sept") return 9;
    for (unsigned i = 0; i < kNames.size(); ++i) {
        if (n == kNames[i]) return i + 1;
        if (n.size() == 3 && kNames[i].substr(0, 3) == n) return i + 1;
    }
    return 0;
}

}  // namespace dwe
