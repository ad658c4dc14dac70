#pragma once

#include "loadfc/config.hpp"
#include "loadfc/metrics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace loadfc {
namespace commands {

/// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> variant;
    std::optional<std::string> preset;
    std::optional<std::string> cadence;
    // forecast-only: date range and horizon
    std::optional<Date> eval_start;
    std::optional<Date> eval_end;
    std::optional<int> horizon;
};

struct SimulateResult {
    std::string load_csv;
    std::string weather_csv;
    std::string truth_file;
    std::string holidays_file;
    int days = 0;
};

/// Generates the scenario and writes the load/weather CSVs, the holidays
/// file and the ground-truth sidecar.
SimulateResult cmd_simulate(const std::string& config_path, const Overrides& overrides = {},
                            std::ostream* log = nullptr);

struct FitResult {
    std::string store_path;
    int pair_models = 0;
    int class_means = 0;
    double gam_gcv = 0.0;
};

/// Fits the trend model and every class-pair curve model on the training
/// window and persists the versioned model store.
FitResult cmd_fit(const std::string& config_path, const Overrides& overrides = {},
                  std::ostream* log = nullptr);

struct ForecastCmdResult {
    std::string forecast_csv;
    int rows = 0;
    int days = 0;
    int audit_violations = 0;
    int fallback_days = 0;
};

/// Forecasts the [eval] window at the configured horizon, writing one CSV
/// row per (date, slot, kind). Runs the no-look-ahead audit over the
/// training windows recorded in the store.
ForecastCmdResult cmd_forecast(const std::string& config_path, const Overrides& overrides = {},
                               std::ostream* log = nullptr);

struct EvaluateResult {
    std::map<std::string, EvalReport> by_kind;
    std::string overall_csv;
    std::string by_month_csv;
    std::string by_day_type_csv;
    std::string per_day_csv;
    std::string report_txt;
};

/// Scores a forecast CSV against an actual-load CSV; writes overall,
/// by-month, by-day-type and per-day CSVs plus an aligned text table with
/// one column per forecast kind present.
EvaluateResult cmd_evaluate(const std::string& forecast_csv, const std::string& actual_csv,
                            const std::string& output_dir, std::ostream* log = nullptr);

/// Ground-truth sidecar access (simulate writes, tests read).
struct TruthFile {
    Eigen::VectorXd population_lambdas;
    std::map<Date, double> weekly_trend;
};

void write_truth(const std::string& path, const datagen::GroundTruth& truth);
TruthFile read_truth(const std::string& path);

} // namespace commands
} // namespace loadfc
