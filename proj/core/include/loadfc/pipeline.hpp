#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/curves.hpp"
#include "loadfc/gam.hpp"
#include "loadfc/series.hpp"
#include "loadfc/svdreg.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace loadfc {

enum class RegressorVariant { H1, H2, H3, H4 };

std::string to_string(RegressorVariant v);
RegressorVariant variant_from_string(const std::string& s);

/// Choice of regressor curve. H1: previous day's residual. H2: previous
/// day's residual joined with the target day's temperature curve, both
/// standardized. H3/H4: half-day versions, where the morning block is
/// predicted from the previous evening and the evening block from the
/// (predicted) morning of the same day.
struct RegressorSpec {
    RegressorVariant variant = RegressorVariant::H2;

    bool uses_temperature() const {
        return variant == RegressorVariant::H2 || variant == RegressorVariant::H4;
    }
    bool half_day() const {
        return variant == RegressorVariant::H3 || variant == RegressorVariant::H4;
    }
};

/// Shared discretization of one day: 48 half-hour points on [0, 1].
const GridPtr& day_grid();
/// First 24 points (00:30-12:00) with their own trapezoid weights.
const GridPtr& half_grid_am();
/// Last 24 points (12:30-24:00).
const GridPtr& half_grid_pm();

Curve slice_am(const Curve& day);
Curve slice_pm(const Curve& day);
Curve join_halves(const Curve& am, const Curve& pm);

/// Temperature forecast curve for one day (or half day) of the series.
enum class HalfPart { full, am, pm };
Curve temperature_curve(const WeatherSeries& weather, const Date& date,
                        HalfPart part = HalfPart::full);

/// Calendar-week (Monday start) aggregation: weekly average load over the
/// 336 half-hours, weekly mean temperature and cloud cover, weekly median
/// of the daily offset codes. Partial boundary weeks are dropped; the first
/// complete week seeds only the lagged covariates of the next one.
std::vector<WeeklyRecord> weekly_aggregate(const HalfHourlySeries& load,
                                           const WeatherSeries& weather);

/// Fitted/predicted weekly trend value per week start.
std::map<Date, double> weekly_trend_values(const GamModel& gam,
                                           const std::vector<WeeklyRecord>& records);

/// Residual curve per day: the 48 observations minus the week's trend value
/// (constant within the week). Days whose week has no record raise
/// MissingTrend.
std::map<Date, Curve> detrend(const HalfHourlySeries& load, const GamModel& gam,
                              const std::vector<WeeklyRecord>& records);

struct TrainingPairs {
    CurveSample sample;
    std::optional<JoinStats> stats; // standardization, H2/H4 only
    std::vector<Date> response_dates;
    Date train_begin;
    Date train_end;
};

/// Consecutive-day pairs with day i-1 in prev_class and day i in
/// target_class, neither a holiday. Responses are the day-i residuals (the
/// part selected for half-day variants); regressors are built per the
/// variant. Throws InsufficientData below n_min.
TrainingPairs build_training_pairs(const std::map<Date, Curve>& residuals, DayClass target_class,
                                   DayClass prev_class, const RegressorSpec& spec,
                                   const WeatherSeries* weather, const std::set<Date>& holidays,
                                   int n_min, HalfPart part = HalfPart::full);

struct PairKey {
    DayClass prev;
    DayClass target;

    auto operator<=>(const PairKey&) const = default;
};

std::string to_string(const PairKey& k);

struct TrainedPairModel {
    CurveRegressionModel model;
    std::optional<JoinStats> join_stats;
    Date train_begin;
    Date train_end;
    int n = 0;
};

/// One entry per class pair: a single full-day model for H1/H2, a morning
/// and an evening model for H3/H4.
struct PairModelSet {
    std::vector<TrainedPairModel> parts;
};

struct ClassMean {
    Curve mean;
    int n = 0;
};

struct ModelRegistry {
    RegressorSpec spec;
    DimSelectConfig dim_cfg;
    int K = 10;
    int n_min = 15;
    Date train_begin;
    Date train_end;
    std::map<PairKey, PairModelSet> models;
    std::map<DayClass, ClassMean> class_means; // baseline fallback per target class
};

/// Fits one curve-regression model (set) per class pair realized by
/// consecutive days in the residual history; pairs with fewer than n_min
/// observations are recorded as absent. Pair fits are independent and may
/// run on several worker threads with identical results.
ModelRegistry fit_all_models(const std::map<Date, Curve>& residuals, const WeatherSeries* weather,
                             const std::set<Date>& holidays, const RegressorSpec& spec,
                             const DimSelectConfig& dim_cfg, int K, int n_min, int workers = 1);

enum class ForecastKind { hybrid, oracle, baseline };

std::string to_string(ForecastKind k);
ForecastKind kind_from_string(const std::string& s);

struct ForecastResult {
    Date date;
    Curve predicted;            // 48 points, MW
    double trend_component = 0; // the week's trend value
    Curve mean_component;
    Curve correction_component;
    ForecastKind kind = ForecastKind::hybrid;
    int r_hat_used = 0;
    int n_train = 0;
    int r_hat_pm = -1;  // evening model, half-day variants only
    int n_train_pm = -1;
    int step = 1;       // forecast horizon this result was produced at
    std::vector<std::string> flags;
};

struct DayInputs {
    WeeklyRecord week;  // covariates of the week containing the target date
    Curve prev_residual;
    std::optional<Curve> temperature; // required for H2/H4
};

/// Hybrid predictor: trend + class-pair mean curve + SVD-regression
/// correction. Throws ModelUnavailable when the class pair has no model.
ForecastResult forecast_day(const Date& date, const ModelRegistry& registry, const GamModel& gam,
                            const DayInputs& inputs);

/// Oracle predictor: the correction uses the true residual's projections on
/// the fitted response directions. Evaluation only.
ForecastResult forecast_oracle(const Date& date, const Curve& y_true_residual,
                               const ModelRegistry& registry, const GamModel& gam,
                               const WeeklyRecord& week);

/// Trend + mean curve, no cross-day dynamics. Falls back to the target
/// class mean when the pair model is absent.
ForecastResult forecast_baseline(const Date& date, const ModelRegistry& registry,
                                 const GamModel& gam, const WeeklyRecord& week);

enum class Cadence { once, per_week, per_day };

std::string to_string(Cadence c);
Cadence cadence_from_string(const std::string& s);

/// End-to-end backtest driver: owns the history, fits the weekly trend
/// model and the class-pair registry over a training window, and produces
/// hybrid/oracle/baseline forecasts with optional multi-step recursion and
/// refit cadence. Records the training windows serving each forecast for
/// the no-look-ahead audit.
class Backtest {
public:
    struct Options {
        RegressorSpec spec;
        DimSelectConfig dim;
        int K = 10;
        int n_min = 15;
        std::string preset = "trend2";
        Cadence cadence = Cadence::per_day;
        Date train_begin;
        Date train_end;
        int workers = 1;
        GamFitOptions gam_options;
    };

    Backtest(HalfHourlySeries load, WeatherSeries weather, std::set<Date> holidays,
             Options options);

    /// Initial fit on [train_begin, train_end].
    void fit();

    /// Installs previously fitted artifacts (model-store load path).
    void install(GamModel gam, ModelRegistry registry);

    const GamModel& gam() const { return gam_; }
    const ModelRegistry& registry() const { return registry_; }
    const std::vector<WeeklyRecord>& training_records() const { return records_; }

    /// Forecasts every non-holiday date in [first, last] at the given
    /// horizon (each result is a horizon-step-ahead forecast). kinds selects
    /// which predictors to emit.
    std::vector<ForecastResult> forecast_range(const Date& first, const Date& last, int horizon,
                                               const std::set<ForecastKind>& kinds);

    /// Multi-step chain: forecasts start_date .. start_date+horizon-1 with
    /// information up to start_date-1, feeding each predicted residual back
    /// as the next regressor.
    std::vector<ForecastResult> forecast_multi_step(const Date& start_date, int horizon);

    /// Number of emitted forecasts whose serving model was trained on data
    /// not strictly before the forecast date.
    int audit_violations() const { return audit_violations_; }

    /// Observed residual for a day, using only load data up to asof.
    Curve observed_residual(const Date& date, const Date& asof);

    WeeklyRecord record_for_week(const Date& monday, const Date& asof);

private:
    void refit(const Date& train_end);
    double trend_for_week(const Date& monday, const Date& asof);
    Curve day_observation(const Date& date) const;
    bool in_series(const Date& date) const;

    HalfHourlySeries load_;
    WeatherSeries weather_;
    std::set<Date> holidays_;
    Options options_;

    GamModel gam_;
    ModelRegistry registry_;
    std::vector<WeeklyRecord> records_;
    Date fitted_end_{};
    bool fitted_ = false;
    Date first_week_monday_{};
    int audit_violations_ = 0;
};

} // namespace loadfc
