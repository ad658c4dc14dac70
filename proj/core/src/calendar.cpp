#include "loadfc/calendar.hpp"
#include "loadfc/errors.hpp"

#include <array>
#include <cstdio>

namespace loadfc {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[static_cast<std::size_t>(month - 1)];
}

bool is_valid(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

// Civil <-> serial conversions following the standard shifted-era algorithm.
std::int64_t to_serial(const Date& d) {
    const std::int64_t y = d.year - (d.month <= 2 ? 1 : 0);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date from_serial(std::int64_t serial) {
    const std::int64_t z = serial + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const int day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    const int month = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    return Date{static_cast<int>(y + (month <= 2 ? 1 : 0)), month, day};
}

int weekday(const Date& d) {
    // 1970-01-01 was a Thursday (3 with Monday = 0).
    const std::int64_t s = to_serial(d) + 3;
    return static_cast<int>(((s % 7) + 7) % 7);
}

Date add_days(const Date& d, std::int64_t n) {
    return from_serial(to_serial(d) + n);
}

std::int64_t days_between(const Date& a, const Date& b) {
    return to_serial(b) - to_serial(a);
}

Date week_start(const Date& d) {
    return add_days(d, -weekday(d));
}

int iso_week_number(const Date& d) {
    // ISO week = week (Mon-start) of the Thursday in the same week.
    const Date thu = add_days(week_start(d), 3);
    const Date jan1{thu.year, 1, 1};
    return static_cast<int>(days_between(jan1, thu) / 7) + 1;
}

Date parse_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw ConfigError("malformed date '" + text + "', expected YYYY-MM-DD");
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (text[i] < '0' || text[i] > '9')
            throw ConfigError("malformed date '" + text + "', expected YYYY-MM-DD");
    Date d;
    d.year = std::stoi(text.substr(0, 4));
    d.month = std::stoi(text.substr(5, 2));
    d.day = std::stoi(text.substr(8, 2));
    if (!is_valid(d)) throw ConfigError("invalid calendar date '" + text + "'");
    return d;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

DayClass classify_day(const Date& d) {
    const int wd = weekday(d);
    const int m = d.month;
    int day_type;
    switch (wd) {
        case 0: day_type = 0; break;           // Mon
        case 1: case 2: case 3: day_type = 1; break; // Tue-Thu
        case 4: day_type = 2; break;           // Fri
        case 5: day_type = 3; break;           // Sat
        default:                               // Sun
            if (m == 6 || m == 7) day_type = 5;
            else if (m == 8) day_type = 6;
            else if (m == 12) day_type = 7;
            else day_type = 4;
    }
    int segment;
    if (m <= 2) segment = 1;
    else if (m == 3) segment = 2;
    else if (m == 4) segment = 3;
    else if (m == 5) segment = 4;
    else if (m <= 7) segment = 5;
    else if (m <= 9) segment = 6;
    else if (m == 10) segment = 7;
    else if (m == 11) segment = 8;
    else segment = 9;
    return DayClass{day_type, segment};
}

bool is_valid(const DayClass& c) {
    return c.day_type >= 0 && c.day_type <= 7 && c.segment >= 1 && c.segment <= 9;
}

std::string to_string(const DayClass& c) {
    return std::to_string(c.day_type) + "." + std::to_string(c.segment);
}

DayClass day_class_from_string(const std::string& text) {
    const auto dot = text.find('.');
    if (dot == std::string::npos) throw ConfigError("malformed day class '" + text + "'");
    DayClass c{std::stoi(text.substr(0, dot)), std::stoi(text.substr(dot + 1))};
    if (!is_valid(c)) throw ConfigError("invalid day class '" + text + "'");
    return c;
}

int expert_offset(const Date& d) {
    const Date mon = week_start(d);
    // Week membership tests use the Monday..Sunday span.
    auto week_contains = [&](int month, int day) {
        for (int i = 0; i < 7; ++i) {
            const Date x = add_days(mon, i);
            if (x.month == month && x.day == day) return true;
        }
        return false;
    };
    if (week_contains(12, 25)) return -3;
    if (week_contains(1, 1)) return -2;
    const int m = mon.month;
    if (m == 12) return -1;
    if (m <= 2) return 0;
    if (m <= 5) return 1;
    if (m >= 6 && m <= 9) {
        if (week_contains(8, 15)) return 6;
        return 2 + (m - 6); // Jun 2, Jul 3, Aug 4, Sep 5
    }
    return 7; // Oct, Nov
}

} // namespace loadfc
