#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/errors.hpp"

#include <vector>

namespace loadfc {

/// Half-hourly load observations over consecutive calendar days.
struct HalfHourlySeries {
    Date start_date;
    std::vector<double> values; // 48 per day, MW

    int days() const { return static_cast<int>(values.size()) / 48; }
    void validate() const;
};

struct WeatherSeries {
    Date start_date;
    std::vector<double> temp_c;      // 48 per day
    std::vector<double> cloud_cover; // 48 per day, [0,1]

    int days() const { return static_cast<int>(temp_c.size()) / 48; }
    void validate() const;
};

} // namespace loadfc
