#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/errors.hpp"

#include <map>
#include <string>
#include <vector>

namespace loadfc {

/// Mean absolute percentage error, as a fraction. Throws ZeroDenominator on
/// any zero truth value.
double mape(const std::vector<double>& pred, const std::vector<double>& truth);

/// Root mean square error.
double rmse(const std::vector<double>& pred, const std::vector<double>& truth);

struct DayMetrics {
    Date date;
    double mape = 0.0;
    double rmse = 0.0;
    std::string kind;
};

struct GroupMetrics {
    int count = 0;
    double mape = 0.0; // mean of per-day MAPE within the group
    double rmse = 0.0;
};

/// Per-day metrics plus month and day-type aggregations; group rows are the
/// unweighted means of the member days' metrics.
struct EvalReport {
    GroupMetrics overall;
    std::map<int, GroupMetrics> by_month;    // 1..12
    std::map<int, GroupMetrics> by_day_type; // 0..7
    std::vector<DayMetrics> per_day;
};

/// Aggregates per-day metrics (each day already scored over its 48
/// half-hours) into a report. All rows must carry the same kind.
EvalReport aggregate_report(const std::vector<DayMetrics>& days);

} // namespace loadfc
