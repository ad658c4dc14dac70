#include "loadfc/commands.hpp"
#include "loadfc/csv.hpp"
#include "loadfc/store.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace loadfc {
namespace commands {

namespace {

namespace fs = std::filesystem;

void apply_model_overrides(RunConfig& cfg, const Overrides& ov) {
    if (ov.workers) cfg.workers = *ov.workers;
    if (ov.variant) cfg.spec.variant = variant_from_string(*ov.variant);
    if (ov.preset) cfg.preset = *ov.preset;
    if (ov.cadence) cfg.cadence = cadence_from_string(*ov.cadence);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::set<Date> load_holidays(const std::string& path) {
    if (path.empty()) return {};
    return csv::read_holidays(path);
}

} // namespace

void write_truth(const std::string& path, const datagen::GroundTruth& truth) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write truth file: " + path);
    out << "loadfc-truth 1\n";
    out << "lambdas " << truth.population_lambdas.size();
    char buf[48];
    for (Eigen::Index j = 0; j < truth.population_lambdas.size(); ++j) {
        std::snprintf(buf, sizeof buf, " %a", truth.population_lambdas(j));
        out << buf;
    }
    out << "\n";
    out << "weekly_trend " << truth.weekly_trend.size() << "\n";
    for (const auto& [monday, value] : truth.weekly_trend) {
        std::snprintf(buf, sizeof buf, " %a", value);
        out << format_date(monday) << buf << "\n";
    }
}

TruthFile read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open truth file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "loadfc-truth" || version != 1) throw Error(path + ": not a truth sidecar");
    TruthFile out;
    std::string key;
    int count = 0;
    in >> key >> count;
    out.population_lambdas.resize(count);
    for (int j = 0; j < count; ++j) {
        std::string tok;
        in >> tok;
        out.population_lambdas(j) = std::strtod(tok.c_str(), nullptr);
    }
    in >> key >> count;
    for (int i = 0; i < count; ++i) {
        std::string date, tok;
        in >> date >> tok;
        out.weekly_trend[parse_date(date)] = std::strtod(tok.c_str(), nullptr);
    }
    return out;
}

SimulateResult cmd_simulate(const std::string& config_path, const Overrides& overrides,
                            std::ostream* log) {
    ConfigFile file = ConfigFile::parse_file(config_path);
    ScenarioFileConfig cfg = ScenarioFileConfig::from(file);
    if (overrides.seed) cfg.scenario.seed = *overrides.seed;

    const datagen::Scenario scenario = datagen::generate(cfg.scenario);
    csv::write_load(cfg.load_csv, scenario.load);
    csv::write_weather(cfg.weather_csv, scenario.weather);
    csv::write_holidays(cfg.holidays_file, scenario.truth.holidays);
    write_truth(cfg.truth_file, scenario.truth);

    SimulateResult result;
    result.load_csv = cfg.load_csv;
    result.weather_csv = cfg.weather_csv;
    result.truth_file = cfg.truth_file;
    result.holidays_file = cfg.holidays_file;
    result.days = scenario.load.days();
    if (log)
        *log << "simulate: wrote " << result.days << " days to " << cfg.load_csv << "\n";
    return result;
}

FitResult cmd_fit(const std::string& config_path, const Overrides& overrides, std::ostream* log) {
    ConfigFile file = ConfigFile::parse_file(config_path);
    RunConfig cfg = RunConfig::from(file);
    apply_model_overrides(cfg, overrides);

    HalfHourlySeries load = csv::read_load(cfg.load_csv);
    WeatherSeries weather = csv::read_weather(cfg.weather_csv);
    const std::set<Date> holidays = load_holidays(cfg.holidays_file);

    const Date series_end = add_days(load.start_date, load.days() - 1);
    const Date train_end = cfg.train_end_set ? cfg.train_end : series_end;
    const Date train_begin = std::max(cfg.train_begin, load.start_date);
    const std::int64_t weeks = days_between(train_begin, train_end) / 7;
    if (weeks < 104)
        throw InsufficientData("cmd_fit: training window has " + std::to_string(weeks) +
                               " weeks; at least 104 complete weeks (2 years) are required");

    Backtest::Options options;
    options.spec = cfg.spec;
    options.dim = cfg.dim;
    options.K = cfg.K;
    options.n_min = cfg.n_min;
    options.preset = cfg.preset;
    options.cadence = cfg.cadence;
    options.train_begin = train_begin;
    options.train_end = train_end;
    options.workers = cfg.workers;
    Backtest backtest(load, weather, holidays, options);
    backtest.fit();

    ModelStore store;
    store.preset = cfg.preset;
    store.spec = cfg.spec;
    store.dim = cfg.dim;
    store.K = cfg.K;
    store.n_min = cfg.n_min;
    store.train_begin = train_begin;
    store.train_end = train_end;
    store.gam = backtest.gam();
    store.registry = backtest.registry();
    save_store(cfg.model_store, store);

    FitResult result;
    result.store_path = cfg.model_store;
    result.pair_models = static_cast<int>(store.registry.models.size());
    result.class_means = static_cast<int>(store.registry.class_means.size());
    result.gam_gcv = store.gam.gcv;
    if (log)
        *log << "fit: " << result.pair_models << " pair models, gam gcv " << result.gam_gcv
             << ", store " << result.store_path << "\n";
    return result;
}

ForecastCmdResult cmd_forecast(const std::string& config_path, const Overrides& overrides,
                               std::ostream* log) {
    ConfigFile file = ConfigFile::parse_file(config_path);
    RunConfig cfg = RunConfig::from(file);
    apply_model_overrides(cfg, overrides);
    if (overrides.eval_start) cfg.eval_start = overrides.eval_start;
    if (overrides.eval_end) cfg.eval_end = overrides.eval_end;
    if (overrides.horizon) cfg.horizon = *overrides.horizon;
    if (!cfg.eval_start || !cfg.eval_end)
        throw ConfigError("cmd_forecast: eval.start and eval.end are required");

    HalfHourlySeries load = csv::read_load(cfg.load_csv);
    WeatherSeries weather = csv::read_weather(cfg.weather_csv);
    const std::set<Date> holidays = load_holidays(cfg.holidays_file);
    ModelStore store = load_store(cfg.model_store);

    Backtest::Options options;
    options.spec = store.spec;
    options.dim = store.dim;
    options.K = store.K;
    options.n_min = store.n_min;
    options.preset = store.preset;
    options.cadence = cfg.cadence;
    options.train_begin = store.train_begin;
    options.train_end = store.train_end;
    options.workers = cfg.workers;
    Backtest backtest(load, weather, holidays, options);
    if (cfg.cadence == Cadence::once) {
        backtest.install(std::move(store.gam), std::move(store.registry));
    }
    // Other cadences refit from the raw history as the window advances.

    const std::vector<ForecastResult> results =
        backtest.forecast_range(*cfg.eval_start, *cfg.eval_end, cfg.horizon, cfg.emit);

    fs::create_directories(cfg.output_dir);
    const std::string out_path = join_path(cfg.output_dir, "forecast.csv");
    csv::write_forecasts(out_path, results);

    ForecastCmdResult result;
    result.forecast_csv = out_path;
    result.rows = static_cast<int>(results.size()) * 48;
    std::set<Date> dates;
    for (const auto& r : results) {
        dates.insert(r.date);
        for (const auto& f : r.flags)
            if (f == "fallback_baseline" || f == "class_mean") {
                ++result.fallback_days;
                break;
            }
    }
    result.days = static_cast<int>(dates.size());
    result.audit_violations = backtest.audit_violations();
    if (log)
        *log << "forecast: " << result.days << " days, " << result.rows << " rows, audit: "
             << result.audit_violations << " look-ahead violations\n";
    return result;
}

namespace {

void write_group_csv(const std::string& path, const std::string& key_name,
                     const std::map<std::string, EvalReport>& reports, bool by_month) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << "kind," << key_name << ",days,mape,rmse\n";
    char buf[128];
    for (const auto& [kind, report] : reports) {
        const auto& groups = by_month ? report.by_month : report.by_day_type;
        for (const auto& [key, g] : groups) {
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%.8f,%.6f\n", kind.c_str(), key, g.count,
                          g.mape, g.rmse);
            out << buf;
        }
    }
}

} // namespace

EvaluateResult cmd_evaluate(const std::string& forecast_csv, const std::string& actual_csv,
                            const std::string& output_dir, std::ostream* log) {
    const std::vector<csv::ForecastRow> rows = csv::read_forecasts(forecast_csv);
    if (rows.empty()) throw EmptyInput("cmd_evaluate: forecast CSV has no rows");
    const HalfHourlySeries actual = csv::read_load(actual_csv);

    // Collate (kind, date) -> 48 predictions.
    std::map<std::pair<std::string, Date>, std::vector<double>> days;
    for (const auto& r : rows) {
        auto& v = days[{r.kind, r.date}];
        if (v.size() != static_cast<std::size_t>(r.slot - 1))
            throw AlignmentError("cmd_evaluate: slots out of order for " + format_date(r.date));
        v.push_back(r.pred_mw);
    }
    std::vector<std::string> missing;
    std::map<std::string, std::vector<DayMetrics>> per_kind;
    for (const auto& [key, preds] : days) {
        const auto& [kind, date] = key;
        if (preds.size() != 48)
            throw AlignmentError("cmd_evaluate: incomplete day " + format_date(date));
        const std::int64_t idx = days_between(actual.start_date, date);
        if (idx < 0 || idx >= actual.days()) {
            missing.push_back(format_date(date));
            continue;
        }
        std::vector<double> truth(actual.values.begin() + idx * 48,
                                  actual.values.begin() + (idx + 1) * 48);
        DayMetrics dm;
        dm.date = date;
        dm.kind = kind;
        dm.mape = mape(preds, truth);
        dm.rmse = rmse(preds, truth);
        per_kind[kind].push_back(dm);
    }
    if (!missing.empty()) {
        std::string msg = "cmd_evaluate: no actuals for dates:";
        for (const auto& d : missing) msg += " " + d;
        throw AlignmentError(msg);
    }

    EvaluateResult result;
    for (const auto& [kind, metrics] : per_kind)
        result.by_kind.emplace(kind, aggregate_report(metrics));

    fs::create_directories(output_dir);
    result.overall_csv = join_path(output_dir, "overall.csv");
    result.by_month_csv = join_path(output_dir, "by_month.csv");
    result.by_day_type_csv = join_path(output_dir, "by_day_type.csv");
    result.per_day_csv = join_path(output_dir, "per_day.csv");
    result.report_txt = join_path(output_dir, "report.txt");

    {
        std::ofstream out(result.overall_csv);
        out << "kind,days,mape,rmse\n";
        char buf[128];
        for (const auto& [kind, report] : result.by_kind) {
            std::snprintf(buf, sizeof buf, "%s,%d,%.8f,%.6f\n", kind.c_str(),
                          report.overall.count, report.overall.mape, report.overall.rmse);
            out << buf;
        }
    }
    write_group_csv(result.by_month_csv, "month", result.by_kind, true);
    write_group_csv(result.by_day_type_csv, "day_type", result.by_kind, false);
    {
        std::ofstream out(result.per_day_csv);
        out << "kind,date,mape,rmse\n";
        char buf[128];
        for (const auto& [kind, report] : result.by_kind) {
            for (const auto& d : report.per_day) {
                std::snprintf(buf, sizeof buf, "%s,%s,%.8f,%.6f\n", kind.c_str(),
                              format_date(d.date).c_str(), d.mape, d.rmse);
                out << buf;
            }
        }
    }
    {
        // Aligned text table, one column per kind present. Day metrics are
        // averaged across days with equal weights.
        std::ofstream out(result.report_txt);
        out << "metric            ";
        for (const auto& [kind, report] : result.by_kind) {
            char buf[32];
            std::snprintf(buf, sizeof buf, " %12s", kind.c_str());
            out << buf;
        }
        out << "\n";
        auto row = [&](const std::string& label, auto getter) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%-18s", label.c_str());
            out << buf;
            for (const auto& [kind, report] : result.by_kind) {
                std::snprintf(buf, sizeof buf, " %12.4f", getter(report));
                out << buf;
            }
            out << "\n";
        };
        row("mape_pct", [](const EvalReport& r) { return 100.0 * r.overall.mape; });
        row("rmse_mw", [](const EvalReport& r) { return r.overall.rmse; });
        row("days", [](const EvalReport& r) { return static_cast<double>(r.overall.count); });
    }
    if (log) {
        for (const auto& [kind, report] : result.by_kind)
            *log << "evaluate: " << kind << " mape " << report.overall.mape * 100.0 << "% rmse "
                 << report.overall.rmse << " over " << report.overall.count << " days\n";
    }
    return result;
}

} // namespace commands
} // namespace loadfc
