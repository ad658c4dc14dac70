#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/pipeline.hpp"
#include "loadfc/series.hpp"

#include <set>
#include <string>
#include <vector>

namespace loadfc {
namespace csv {

/// Load CSV: header `date,slot,load_mw`, slot 1..48, one row per half hour,
/// dates contiguous. Gaps raise MissingData naming their location.
HalfHourlySeries read_load(const std::string& path);
void write_load(const std::string& path, const HalfHourlySeries& series);

/// Weather CSV: header `date,slot,temp_c,cloud_cover`, cloud in [0,1].
WeatherSeries read_weather(const std::string& path);
void write_weather(const std::string& path, const WeatherSeries& series);

/// Holidays file: one YYYY-MM-DD per line, blank lines and '#' comments
/// allowed.
std::set<Date> read_holidays(const std::string& path);
void write_holidays(const std::string& path, const std::vector<Date>& holidays);

/// Forecast CSV rows, one per (date, slot):
/// `date,slot,pred_mw,trend_mw,mean_mw,corr_mw,kind,r_hat,n_train,flags`.
struct ForecastRow {
    Date date;
    int slot = 1;
    double pred_mw = 0, trend_mw = 0, mean_mw = 0, corr_mw = 0;
    std::string kind;
    int r_hat = 0;
    int n_train = 0;
    std::string flags;
};

void write_forecasts(const std::string& path, const std::vector<ForecastResult>& results);
std::vector<ForecastRow> read_forecasts(const std::string& path);

} // namespace csv
} // namespace loadfc
