#include "loadfc/csv.hpp"
#include "loadfc/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace loadfc {
namespace csv {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw MissingData("malformed number '" + s + "' in " + where);
    return v;
}

int parse_int(const std::string& s, const std::string& where) {
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw MissingData("malformed integer '" + s + "' in " + where);
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingData("cannot open file: " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    return out;
}

void expect_header(std::istream& in, const std::string& expected, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw MissingData(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected)
        throw MissingData(path + ": expected header '" + expected + "', got '" + line + "'");
}

// Reads per-slot rows into dense per-day arrays; validates contiguity and
// slot completeness and reports gap locations.
template <typename OnRow>
void read_slot_rows(const std::string& path, const std::string& header, int n_fields,
                    Date& start_date, int& n_days, OnRow&& on_row) {
    std::ifstream in = open_in(path);
    expect_header(in, header, path);
    std::string line;
    int line_no = 1;
    bool first = true;
    Date current{};
    int expected_slot = 1;
    std::int64_t day_index = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        const std::string where = path + ":" + std::to_string(line_no);
        if (static_cast<int>(fields.size()) != n_fields)
            throw MissingData(where + ": expected " + std::to_string(n_fields) + " fields");
        const Date d = parse_date(fields[0]);
        const int slot = parse_int(fields[1], where);
        if (slot < 1 || slot > 48) throw MissingData(where + ": slot out of 1..48");
        if (first) {
            start_date = d;
            current = d;
            first = false;
            day_index = 0;
        }
        if (d != current) {
            if (expected_slot != 1)
                throw MissingData(path + ": missing slots " + std::to_string(expected_slot) +
                                  "..48 for " + format_date(current));
            const Date next = add_days(current, 1);
            if (d != next)
                throw MissingData(path + ": gap between " + format_date(current) + " and " +
                                  format_date(d));
            current = d;
            ++day_index;
        }
        if (slot != expected_slot)
            throw MissingData(where + ": expected slot " + std::to_string(expected_slot) +
                              " of " + format_date(current));
        on_row(day_index, slot, fields, where);
        expected_slot = slot == 48 ? 1 : slot + 1;
    }
    if (first) throw MissingData(path + ": no data rows");
    if (expected_slot != 1)
        throw MissingData(path + ": missing slots " + std::to_string(expected_slot) + "..48 for " +
                          format_date(current));
    n_days = static_cast<int>(day_index) + 1;
}

} // namespace

HalfHourlySeries read_load(const std::string& path) {
    HalfHourlySeries series;
    std::vector<double> values;
    Date start;
    int n_days = 0;
    read_slot_rows(path, "date,slot,load_mw", 3, start, n_days,
                   [&](std::int64_t, int, const std::vector<std::string>& f,
                       const std::string& where) {
                       values.push_back(parse_double(f[2], where));
                   });
    series.start_date = start;
    series.values = std::move(values);
    series.validate();
    return series;
}

void write_load(const std::string& path, const HalfHourlySeries& series) {
    std::ofstream out = open_out(path);
    out << "date,slot,load_mw\n";
    char buf[96];
    for (int i = 0; i < series.days(); ++i) {
        const std::string date = format_date(add_days(series.start_date, i));
        for (int k = 0; k < 48; ++k) {
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f\n", date.c_str(), k + 1,
                          series.values[static_cast<std::size_t>(i) * 48 +
                                        static_cast<std::size_t>(k)]);
            out << buf;
        }
    }
}

WeatherSeries read_weather(const std::string& path) {
    WeatherSeries series;
    std::vector<double> temps, clouds;
    Date start;
    int n_days = 0;
    read_slot_rows(path, "date,slot,temp_c,cloud_cover", 4, start, n_days,
                   [&](std::int64_t, int, const std::vector<std::string>& f,
                       const std::string& where) {
                       temps.push_back(parse_double(f[2], where));
                       const double cl = parse_double(f[3], where);
                       if (cl < 0.0 || cl > 1.0)
                           throw MissingData(where + ": cloud_cover outside [0,1]");
                       clouds.push_back(cl);
                   });
    series.start_date = start;
    series.temp_c = std::move(temps);
    series.cloud_cover = std::move(clouds);
    series.validate();
    return series;
}

void write_weather(const std::string& path, const WeatherSeries& series) {
    std::ofstream out = open_out(path);
    out << "date,slot,temp_c,cloud_cover\n";
    char buf[112];
    for (int i = 0; i < series.days(); ++i) {
        const std::string date = format_date(add_days(series.start_date, i));
        for (int k = 0; k < 48; ++k) {
            const std::size_t idx =
                static_cast<std::size_t>(i) * 48 + static_cast<std::size_t>(k);
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f\n", date.c_str(), k + 1,
                          series.temp_c[idx], series.cloud_cover[idx]);
            out << buf;
        }
    }
}

std::set<Date> read_holidays(const std::string& path) {
    std::ifstream in = open_in(path);
    std::set<Date> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        out.insert(parse_date(line));
    }
    return out;
}

void write_holidays(const std::string& path, const std::vector<Date>& holidays) {
    std::ofstream out = open_out(path);
    for (const Date& d : holidays) out << format_date(d) << "\n";
}

void write_forecasts(const std::string& path, const std::vector<ForecastResult>& results) {
    std::ofstream out = open_out(path);
    out << "date,slot,pred_mw,trend_mw,mean_mw,corr_mw,kind,r_hat,n_train,flags\n";
    char buf[256];
    for (const auto& r : results) {
        const std::string date = format_date(r.date);
        const std::string kind = to_string(r.kind);
        std::string flags;
        for (std::size_t i = 0; i < r.flags.size(); ++i) {
            if (i) flags += "|";
            flags += r.flags[i];
        }
        for (int k = 0; k < 48; ++k) {
            const bool pm_part = k >= 24 && r.r_hat_pm >= 0;
            std::snprintf(buf, sizeof buf, "%s,%d,%.6f,%.6f,%.6f,%.6f,%s,%d,%d,%s\n",
                          date.c_str(), k + 1, r.predicted.values()(k), r.trend_component,
                          r.mean_component.values()(k), r.correction_component.values()(k),
                          kind.c_str(), pm_part ? r.r_hat_pm : r.r_hat_used,
                          pm_part ? r.n_train_pm : r.n_train, flags.c_str());
            out << buf;
        }
    }
}

std::vector<ForecastRow> read_forecasts(const std::string& path) {
    std::ifstream in = open_in(path);
    expect_header(in, "date,slot,pred_mw,trend_mw,mean_mw,corr_mw,kind,r_hat,n_train,flags",
                  path);
    std::vector<ForecastRow> rows;
    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split(line, ',');
        const std::string where = path + ":" + std::to_string(line_no);
        if (f.size() != 10) throw MissingData(where + ": expected 10 fields");
        ForecastRow r;
        r.date = parse_date(f[0]);
        r.slot = parse_int(f[1], where);
        r.pred_mw = parse_double(f[2], where);
        r.trend_mw = parse_double(f[3], where);
        r.mean_mw = parse_double(f[4], where);
        r.corr_mw = parse_double(f[5], where);
        r.kind = f[6];
        r.r_hat = parse_int(f[7], where);
        r.n_train = parse_int(f[8], where);
        r.flags = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace csv
} // namespace loadfc
