#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace loadfc {

/// Timezone-free civil date. Proleptic Gregorian calendar, leap days handled
/// explicitly via the serial-day conversion.
struct Date {
    int year = 1970;
    int month = 1; // 1..12
    int day = 1;   // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_leap_year(int year);
int days_in_month(int year, int month);
bool is_valid(const Date& d);

/// Days since 1970-01-01 (negative before).
std::int64_t to_serial(const Date& d);
Date from_serial(std::int64_t serial);

/// 0 = Monday ... 6 = Sunday.
int weekday(const Date& d);

Date add_days(const Date& d, std::int64_t n);
std::int64_t days_between(const Date& a, const Date& b); // b - a

/// Monday of the calendar week containing d.
Date week_start(const Date& d);

/// ISO 8601 week number, 1..53.
int iso_week_number(const Date& d);

/// Parses strict "YYYY-MM-DD"; throws ConfigError on malformed input.
Date parse_date(const std::string& text);
std::string format_date(const Date& d);

/// Day classification: day type 0..7 and seasonal segment 1..9.
///
/// Day types: 0 Mon, 1 Tue-Thu, 2 Fri, 3 Sat, 4 Sun (rest of year),
/// 5 Sun (Jun-Jul), 6 Sun (Aug), 7 Sun (Dec).
/// Segments: 1 Jan-Feb, 2 Mar, 3 Apr, 4 May, 5 Jun-Jul, 6 Aug-Sep,
/// 7 Oct, 8 Nov, 9 Dec.
struct DayClass {
    int day_type = 0;
    int segment = 1;

    auto operator<=>(const DayClass&) const = default;
};

DayClass classify_day(const Date& d);
bool is_valid(const DayClass& c);
std::string to_string(const DayClass& c); // "t.s"
DayClass day_class_from_string(const std::string& text);

/// Seasonal offset code in {-3..7}, constant over each Monday-start week.
/// Weeks containing Dec 25 -> -3, Jan 1 -> -2, other December weeks -> -1,
/// remaining winter (Jan-Feb) -> 0, spring (Mar-May) -> 1, summer
/// (Jun..Sep) -> 2..5 by month with mid-August holiday weeks -> 6,
/// autumn (Oct-Nov) -> 7.
int expert_offset(const Date& d);

} // namespace loadfc
