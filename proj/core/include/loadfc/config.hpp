#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/datagen.hpp"
#include "loadfc/pipeline.hpp"

#include <map>
#include <optional>
#include <string>

namespace loadfc {

/// Flat key-value file with [section] headers, '#' comments and 'key = value'
/// lines. Keys are addressed as "section.key". Unknown keys are rejected by
/// the typed readers below.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    Date get_date(const std::string& key) const;

    /// Every key must have been consumed by one of the getters; leftovers
    /// raise ConfigError naming the first unknown key and its line.
    void reject_unknown_keys() const;

    const std::string& origin() const { return origin_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };
    std::map<std::string, Entry> entries_;
    std::string origin_;
};

/// Scenario file for `simulate` ([scenario] parameters + [paths] outputs).
struct ScenarioFileConfig {
    datagen::ScenarioConfig scenario;
    std::string load_csv = "load.csv";
    std::string weather_csv = "weather.csv";
    std::string truth_file = "truth.txt";
    std::string holidays_file = "holidays.txt";

    static ScenarioFileConfig from(const ConfigFile& cfg);
};

/// Run configuration shared by fit/forecast/evaluate.
struct RunConfig {
    // [paths]
    std::string load_csv;
    std::string weather_csv;
    std::string holidays_file;
    std::string model_store = "model.store";
    std::string output_dir = ".";
    // [model]
    std::string preset = "trend2";
    RegressorSpec spec;
    int K = 10;
    int n_min = 15;
    Cadence cadence = Cadence::per_week;
    int workers = 1;
    // [dim]
    DimSelectConfig dim;
    // [train]
    Date train_begin{1900, 1, 1};
    Date train_end{2999, 12, 31};
    bool train_end_set = false;
    // [eval]
    std::optional<Date> eval_start;
    std::optional<Date> eval_end;
    int horizon = 1;
    std::set<ForecastKind> emit{ForecastKind::hybrid};

    static RunConfig from(const ConfigFile& cfg);
};

} // namespace loadfc
