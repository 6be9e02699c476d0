#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dwe {

/// Timezone-free Gregorian calendar date.
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);
    explicit Date(std::chrono::sys_days days);

    [[nodiscard]] int year() const { return static_cast<int>(ymd_.year()); }
    [[nodiscard]] unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
    [[nodiscard]] unsigned day() const { return static_cast<unsigned>(ymd_.day()); }

    [[nodiscard]] std::chrono::sys_days sys_days() const { return std::chrono::sys_days{ymd_}; }

    /// 1 = Monday ... 7 = Sunday.
    [[nodiscard]] int iso_weekday() const;
    /// 1-based ordinal day within the year.
    [[nodiscard]] int day_of_year() const;

    [[nodiscard]] Date plus_days(long n) const;
    [[nodiscard]] long days_since(const Date& other) const;

    /// YYYY-MM-DD
    [[nodiscard]] std::string iso() const;

    friend bool operator==(const Date& a, const Date& b) { return a.ymd_ == b.ymd_; }
    friend std::strong_ordering operator<=>(const Date& a, const Date& b) { return a.ymd_ <=> b.ymd_; }

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January, std::chrono::day{1}};
};

struct DateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Strict YYYY-MM-DD. Throws DateError.
[[nodiscard]] Date parse_iso_date(std::string_view text);
/// Empty (after trimming) yields nullopt; anything else must be YYYY-MM-DD.
[[nodiscard]] std::optional<Date> parse_optional_iso_date(std::string_view text);

[[nodiscard]] bool is_valid_date(int year, unsigned month, unsigned day);

/// Month name ("August", "aug", "Sept.") to 1..12, or 0.
[[nodiscard]] unsigned month_from_name(std::string_view name);

}  // namespace dwe
