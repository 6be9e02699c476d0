#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dwe/date.hpp"
#include "dwe/text.hpp"

using dwe::Date;

TEST(Date, IsoWeekdayKnownDays) {
    EXPECT_EQ(Date(2005, 12, 9).iso_weekday(), 5);
    EXPECT_EQ(Date(2006, 8, 12).iso_weekday(), 6);
    EXPECT_EQ(Date(2006, 8, 7).iso_weekday(), 1);
    EXPECT_EQ(Date(2000, 1, 2).iso_weekday(), 7);
}

TEST(Date, DayOfYearAndArithmetic) {
    EXPECT_EQ(Date(2006, 1, 1).day_of_year(), 1);
    EXPECT_EQ(Date(2004, 12, 31).day_of_year(), 366);
    EXPECT_EQ(Date(2006, 2, 27).plus_days(2), Date(2006, 3, 1));
    EXPECT_EQ(Date(2016, 8, 31).days_since(Date(2010, 1, 1)), 2434);
}

TEST(Date, RejectsInvalid) {
    EXPECT_THROW(Date(2006, 2, 29), dwe::DateError);
    EXPECT_THROW(Date(2006, 13, 1), dwe::DateError);
    EXPECT_TRUE(dwe::is_valid_date(2004, 2, 29));
}

TEST(Date, ParseIso) {
    EXPECT_EQ(dwe::parse_iso_date("2006-08-07"), Date(2006, 8, 7));
    EXPECT_THROW((void)dwe::parse_iso_date("2006-8-7"), dwe::DateError);
    EXPECT_THROW((void)dwe::parse_iso_date("07-08-06"), dwe::DateError);
    EXPECT_FALSE(dwe::parse_optional_iso_date("  ").has_value());
    EXPECT_EQ(Date(987, 3, 4).iso(), "0987-03-04");
}

TEST(Date, MonthNames) {
    EXPECT_EQ(dwe::month_from_name("August"), 8u);
    EXPECT_EQ(dwe::month_from_name("dec"), 12u);
    EXPECT_EQ(dwe::month_from_name("Sept."), 9u);
    EXPECT_EQ(dwe::month_from_name("Ma"), 0u);
    EXPECT_EQ(dwe::month_from_name("Augustus"), 0u);
}

TEST(Text, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng);
        EXPECT_EQ(dwe::parse_double(dwe::format_double(v)), v);
    }
    EXPECT_EQ(dwe::format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(dwe::format_fixed(3.14159, 2), "3.14");
}

TEST(Text, SplitTrimParse) {
    const auto parts = dwe::split("a,,b", ',');
    ASSERT_EQ(parts.size(), 3u);
    EXPECT_EQ(parts[1], "");
    EXPECT_EQ(dwe::trim("  x \t"), "x");
    EXPECT_EQ(dwe::parse_int(" 42 "), 42);
    EXPECT_THROW((void)dwe::parse_int("4x"), std::invalid_argument);
    EXPECT_THROW((void)dwe::parse_double(""), std::invalid_argument);
}

TEST(Text, Fnv1aKnownVector) {
    EXPECT_EQ(dwe::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(dwe::fnv1a_hex("a"), "af63dc4c8601ec8c");
}
