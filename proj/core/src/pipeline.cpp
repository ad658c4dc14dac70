#include "loadfc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace loadfc {

void HalfHourlySeries::validate() const {
    if (values.empty() || values.size() % 48 != 0)
        throw Error("HalfHourlySeries: length must be a positive multiple of 48");
    for (double v : values)
        if (!(v > 0.0)) throw Error("HalfHourlySeries: values must be positive");
}

void WeatherSeries::validate() const {
    if (temp_c.size() % 48 != 0 || cloud_cover.size() != temp_c.size())
        throw Error("WeatherSeries: misaligned temperature/cloud arrays");
}

std::string to_string(RegressorVariant v) {
    switch (v) {
        case RegressorVariant::H1: return "H1";
        case RegressorVariant::H2: return "H2";
        case RegressorVariant::H3: return "H3";
        case RegressorVariant::H4: return "H4";
    }
    return "?";
}

RegressorVariant variant_from_string(const std::string& s) {
    if (s == "H1") return RegressorVariant::H1;
    if (s == "H2") return RegressorVariant::H2;
    if (s == "H3") return RegressorVariant::H3;
    if (s == "H4") return RegressorVariant::H4;
    throw ConfigError("unknown regressor variant '" + s + "' (expected H1..H4)");
}

const GridPtr& day_grid() {
    static const GridPtr grid = Grid::uniform(0.0, 1.0, 48);
    return grid;
}

const GridPtr& half_grid_am() {
    static const GridPtr grid = Grid::make(day_grid()->points().head(24));
    return grid;
}

const GridPtr& half_grid_pm() {
    static const GridPtr grid = Grid::make(day_grid()->points().tail(24));
    return grid;
}

Curve slice_am(const Curve& day) {
    if (day.size() != 48) throw GridMismatch("slice_am: expected a 48-point day curve");
    return Curve(half_grid_am(), day.values().head(24));
}

Curve slice_pm(const Curve& day) {
    if (day.size() != 48) throw GridMismatch("slice_pm: expected a 48-point day curve");
    return Curve(half_grid_pm(), day.values().tail(24));
}

Curve join_halves(const Curve& am, const Curve& pm) {
    if (am.size() != 24 || pm.size() != 24)
        throw GridMismatch("join_halves: expected 24-point halves");
    Eigen::VectorXd v(48);
    v.head(24) = am.values();
    v.tail(24) = pm.values();
    return Curve(day_grid(), std::move(v));
}

Curve temperature_curve(const WeatherSeries& weather, const Date& date, HalfPart part) {
    const std::int64_t idx = days_between(weather.start_date, date);
    if (idx < 0 || idx >= weather.days())
        throw MissingData("temperature_curve: no weather for " + format_date(date));
    const auto* base = weather.temp_c.data() + idx * 48;
    switch (part) {
        case HalfPart::full:
            return Curve(day_grid(), Eigen::Map<const Eigen::VectorXd>(base, 48));
        case HalfPart::am:
            return Curve(half_grid_am(), Eigen::Map<const Eigen::VectorXd>(base, 24));
        case HalfPart::pm:
            return Curve(half_grid_pm(), Eigen::Map<const Eigen::VectorXd>(base + 24, 24));
    }
    throw Error("temperature_curve: bad part");
}

std::vector<WeeklyRecord> weekly_aggregate(const HalfHourlySeries& load,
                                           const WeatherSeries& weather) {
    load.validate();
    weather.validate();
    if (!(weather.start_date == load.start_date) || weather.days() < load.days())
        throw AlignmentError("weekly_aggregate: weather does not cover the load series");

    const int n_days = load.days();
    const Date start = load.start_date;
    const int lead = (7 - weekday(start)) % 7;
    std::vector<Date> mondays;
    for (int off = lead; off + 7 <= n_days; off += 7) mondays.push_back(add_days(start, off));
    if (mondays.size() < 2)
        throw InsufficientData("weekly_aggregate: need at least 2 complete weeks");

    struct WeekAgg {
        double load = 0, temp = 0, cloud = 0;
        int offset = 0;
    };
    std::vector<WeekAgg> agg;
    for (const Date& monday : mondays) {
        const std::int64_t off = days_between(start, monday);
        WeekAgg w;
        for (int k = 0; k < 336; ++k) {
            w.load += load.values[static_cast<std::size_t>(off * 48 + k)];
            w.temp += weather.temp_c[static_cast<std::size_t>(off * 48 + k)];
            w.cloud += weather.cloud_cover[static_cast<std::size_t>(off * 48 + k)];
        }
        w.load /= 336.0;
        w.temp /= 336.0;
        w.cloud /= 336.0;
        // Weekly median of the daily offsets (constant within a week by
        // construction of the offset code, but computed as stated).
        std::array<int, 7> daily{};
        for (int i = 0; i < 7; ++i) daily[static_cast<std::size_t>(i)] = expert_offset(add_days(monday, i));
        std::sort(daily.begin(), daily.end());
        w.offset = daily[3];
        agg.push_back(w);
    }

    std::vector<WeeklyRecord> records;
    for (std::size_t k = 1; k < mondays.size(); ++k) {
        WeeklyRecord r;
        r.week_start = mondays[k];
        r.t = static_cast<int>(k);
        r.load = agg[k].load;
        r.load_prev = agg[k - 1].load;
        r.offset = agg[k].offset;
        r.temp = agg[k].temp;
        r.temp_prev = agg[k - 1].temp;
        r.cloud = agg[k].cloud;
        r.week_of_year = iso_week_number(mondays[k]);
        r.validate();
        records.push_back(r);
    }
    return records;
}

std::map<Date, double> weekly_trend_values(const GamModel& gam,
                                           const std::vector<WeeklyRecord>& records) {
    std::map<Date, double> out;
    for (const auto& r : records) out[r.week_start] = predict_gam(gam, r);
    return out;
}

std::map<Date, Curve> detrend(const HalfHourlySeries& load, const GamModel& gam,
                              const std::vector<WeeklyRecord>& records) {
    if (records.empty()) throw EmptyInput("detrend: no weekly records");
    const std::map<Date, double> trend = weekly_trend_values(gam, records);
    std::map<Date, Curve> residuals;
    const Date first = records.front().week_start;
    const Date last = add_days(records.back().week_start, 6);
    for (Date d = first; d <= last; d = add_days(d, 1)) {
        const std::int64_t idx = days_between(load.start_date, d);
        if (idx < 0 || idx >= load.days()) continue;
        const auto it = trend.find(week_start(d));
        if (it == trend.end())
            throw MissingTrend("detrend: no trend value for week of " + format_date(d));
        Eigen::VectorXd v =
            Eigen::Map<const Eigen::VectorXd>(load.values.data() + idx * 48, 48).array() -
            it->second;
        residuals.emplace(d, Curve(day_grid(), std::move(v)));
    }
    return residuals;
}

namespace {

Curve residual_part(const Curve& day, HalfPart part) {
    switch (part) {
        case HalfPart::full: return day;
        case HalfPart::am: return slice_am(day);
        case HalfPart::pm: return slice_pm(day);
    }
    throw Error("residual_part: bad part");
}

} // namespace

TrainingPairs build_training_pairs(const std::map<Date, Curve>& residuals, DayClass target_class,
                                   DayClass prev_class, const RegressorSpec& spec,
                                   const WeatherSeries* weather, const std::set<Date>& holidays,
                                   int n_min, HalfPart part) {
    if (spec.half_day() && part == HalfPart::full)
        throw Error("build_training_pairs: half-day variant needs part am or pm");
    if (!spec.half_day() && part != HalfPart::full)
        throw Error("build_training_pairs: full-day variant takes part = full");
    if (spec.uses_temperature() && weather == nullptr)
        throw MissingData("build_training_pairs: variant needs a weather series");

    // Load-side regressor and response slices per variant:
    //   full: X = previous day's residual, Y = day's residual
    //   am:   X = previous day's evening, Y = day's morning
    //   pm:   X = day's own morning,      Y = day's evening
    TrainingPairs out;
    std::vector<Curve> xs_load, temps, ys;
    for (auto it = residuals.begin(); it != residuals.end(); ++it) {
        const Date d = it->first;
        const Date prev = add_days(d, -1);
        const auto pit = residuals.find(prev);
        if (pit == residuals.end()) continue;
        if (classify_day(d) != target_class || classify_day(prev) != prev_class) continue;
        if (holidays.count(d) || holidays.count(prev)) continue;

        Curve y = residual_part(it->second, part);
        Curve x_load = part == HalfPart::pm ? slice_am(it->second)
                                            : residual_part(pit->second,
                                                            part == HalfPart::am ? HalfPart::pm
                                                                                 : HalfPart::full);
        if (spec.uses_temperature()) temps.push_back(temperature_curve(*weather, d, part));
        xs_load.push_back(std::move(x_load));
        ys.push_back(std::move(y));
        out.response_dates.push_back(d);
    }
    const int n = static_cast<int>(ys.size());
    if (n < n_min)
        throw InsufficientData("build_training_pairs: " + std::to_string(n) + " pairs for " +
                               to_string(prev_class) + "->" + to_string(target_class) +
                               ", need " + std::to_string(n_min));

    if (spec.uses_temperature()) {
        out.stats = compute_join_stats(xs_load, temps);
        for (int i = 0; i < n; ++i)
            out.sample.regressors.push_back(standardize_and_join(
                xs_load[static_cast<std::size_t>(i)], temps[static_cast<std::size_t>(i)],
                *out.stats));
    } else {
        out.sample.regressors = std::move(xs_load);
    }
    out.sample.responses = std::move(ys);
    out.train_begin = out.response_dates.front();
    out.train_end = out.response_dates.back();
    return out;
}

std::string to_string(const PairKey& k) {
    return to_string(k.prev) + "->" + to_string(k.target);
}

ModelRegistry fit_all_models(const std::map<Date, Curve>& residuals, const WeatherSeries* weather,
                             const std::set<Date>& holidays, const RegressorSpec& spec,
                             const DimSelectConfig& dim_cfg, int K, int n_min, int workers) {
    ModelRegistry registry;
    registry.spec = spec;
    registry.dim_cfg = dim_cfg;
    registry.K = K;
    registry.n_min = n_min;
    if (!residuals.empty()) {
        registry.train_begin = residuals.begin()->first;
        registry.train_end = residuals.rbegin()->first;
    }

    // Class means over all non-holiday days (baseline fallback).
    std::map<DayClass, std::vector<Curve>> by_class;
    for (const auto& [d, curve] : residuals)
        if (!holidays.count(d)) by_class[classify_day(d)].push_back(curve);
    for (const auto& [cls, curves] : by_class)
        registry.class_means.emplace(cls,
                                     ClassMean{mean_curve(curves), static_cast<int>(curves.size())});

    // Realized consecutive-day pairs with enough observations.
    std::map<PairKey, int> counts;
    for (auto it = residuals.begin(); it != residuals.end(); ++it) {
        const Date d = it->first;
        const Date prev = add_days(d, -1);
        if (!residuals.count(prev)) continue;
        if (holidays.count(d) || holidays.count(prev)) continue;
        counts[PairKey{classify_day(prev), classify_day(d)}] += 1;
    }
    std::vector<PairKey> keys;
    for (const auto& [key, n] : counts)
        if (n >= n_min) keys.push_back(key);

    const std::vector<HalfPart> parts = spec.half_day()
                                            ? std::vector<HalfPart>{HalfPart::am, HalfPart::pm}
                                            : std::vector<HalfPart>{HalfPart::full};

    std::vector<std::optional<PairModelSet>> fitted(keys.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= keys.size()) break;
            const PairKey key = keys[i];
            PairModelSet set;
            try {
                for (HalfPart part : parts) {
                    TrainingPairs pairs = build_training_pairs(residuals, key.target, key.prev,
                                                               spec, weather, holidays, n_min,
                                                               part);
                    const int n = pairs.sample.size();
                    const int m1 = static_cast<int>(pairs.sample.responses[0].size());
                    const int m2 = static_cast<int>(pairs.sample.regressors[0].size());
                    const int d_eff = std::min({dim_cfg.d, n - 1, m1, m2});
                    const int k_eff = std::min(K, d_eff);
                    TrainedPairModel tm;
                    tm.model = fit_curve_regression(pairs.sample, dim_cfg, k_eff);
                    tm.join_stats = pairs.stats;
                    tm.train_begin = pairs.train_begin;
                    tm.train_end = pairs.train_end;
                    tm.n = n;
                    set.parts.push_back(std::move(tm));
                }
                fitted[i] = std::move(set);
            } catch (const Error&) {
                // Degenerate pair: recorded as absent, baseline serves it.
                fitted[i].reset();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (fitted[i]) registry.models.emplace(keys[i], std::move(*fitted[i]));
    return registry;
}

std::string to_string(ForecastKind k) {
    switch (k) {
        case ForecastKind::hybrid: return "hybrid";
        case ForecastKind::oracle: return "oracle";
        case ForecastKind::baseline: return "baseline";
    }
    return "?";
}

ForecastKind kind_from_string(const std::string& s) {
    if (s == "hybrid") return ForecastKind::hybrid;
    if (s == "oracle") return ForecastKind::oracle;
    if (s == "baseline") return ForecastKind::baseline;
    throw ConfigError("unknown forecast kind '" + s + "'");
}

namespace {

ForecastResult assemble(const Date& date, double trend, const Curve& mean, const Curve& corr,
                        ForecastKind kind) {
    ForecastResult r;
    r.date = date;
    r.kind = kind;
    r.trend_component = trend;
    r.mean_component = mean;
    r.correction_component = corr;
    // predicted = (trend + mean) + correction, fixed evaluation order so the
    // decomposition identity holds bit-exactly.
    Eigen::VectorXd v = mean.values().array() + trend;
    v += corr.values();
    r.predicted = Curve(mean.grid_ptr(), std::move(v));
    return r;
}

const PairModelSet& find_pair(const ModelRegistry& registry, const Date& date) {
    const PairKey key{classify_day(add_days(date, -1)), classify_day(date)};
    const auto it = registry.models.find(key);
    if (it == registry.models.end())
        throw ModelUnavailable("no model for class pair " + to_string(key) + " on " +
                               format_date(date));
    return it->second;
}

Curve regressor_for(const TrainedPairModel& tm, const RegressorSpec& spec, const Curve& load_part,
                    const std::optional<Curve>& temp_part) {
    if (!spec.uses_temperature()) return load_part;
    if (!temp_part)
        throw MissingData("forecast: variant " + to_string(spec.variant) +
                          " needs a temperature forecast curve");
    return standardize_and_join(load_part, *temp_part, *tm.join_stats);
}

} // namespace

ForecastResult forecast_day(const Date& date, const ModelRegistry& registry, const GamModel& gam,
                            const DayInputs& inputs) {
    const PairModelSet& set = find_pair(registry, date);
    const GamPrediction trend = predict_gam_ex(gam, inputs.week);
    const RegressorSpec& spec = registry.spec;

    ForecastResult out;
    if (!spec.half_day()) {
        const TrainedPairModel& tm = set.parts.at(0);
        std::optional<Curve> temp;
        if (spec.uses_temperature()) {
            if (!inputs.temperature) throw MissingData("forecast_day: temperature missing");
            temp = *inputs.temperature;
        }
        const Curve x = regressor_for(tm, spec, inputs.prev_residual, temp);
        const Curve pred = predict_response_curve(tm.model, x);
        const Curve& mean = tm.model.cross_cov.mean_y;
        out = assemble(date, trend.value, mean, pred - mean, ForecastKind::hybrid);
        out.r_hat_used = tm.model.r_hat;
        out.n_train = tm.n;
    } else {
        const TrainedPairModel& am = set.parts.at(0);
        const TrainedPairModel& pm = set.parts.at(1);
        std::optional<Curve> temp_am, temp_pm;
        if (spec.uses_temperature()) {
            if (!inputs.temperature) throw MissingData("forecast_day: temperature missing");
            temp_am = slice_am(*inputs.temperature);
            temp_pm = slice_pm(*inputs.temperature);
        }
        const Curve x_am = regressor_for(am, spec, slice_pm(inputs.prev_residual), temp_am);
        const Curve pred_am = predict_response_curve(am.model, x_am);
        // The evening block is regressed on the (here: predicted) morning.
        const Curve x_pm = regressor_for(pm, spec, pred_am, temp_pm);
        const Curve pred_pm = predict_response_curve(pm.model, x_pm);
        const Curve mean = join_halves(am.model.cross_cov.mean_y, pm.model.cross_cov.mean_y);
        const Curve corr = join_halves(pred_am - am.model.cross_cov.mean_y,
                                       pred_pm - pm.model.cross_cov.mean_y);
        out = assemble(date, trend.value, mean, corr, ForecastKind::hybrid);
        out.r_hat_used = am.model.r_hat;
        out.n_train = am.n;
        out.r_hat_pm = pm.model.r_hat;
        out.n_train_pm = pm.n;
    }
    if (trend.extrapolated) out.flags.push_back("gam_extrapolated");
    return out;
}

ForecastResult forecast_oracle(const Date& date, const Curve& y_true_residual,
                               const ModelRegistry& registry, const GamModel& gam,
                               const WeeklyRecord& week) {
    const PairModelSet& set = find_pair(registry, date);
    const GamPrediction trend = predict_gam_ex(gam, week);

    ForecastResult out;
    if (!registry.spec.half_day()) {
        const TrainedPairModel& tm = set.parts.at(0);
        const Eigen::VectorXd xi = oracle_scores(y_true_residual, tm.model);
        const Curve recon = reconstruct_response(tm.model, xi);
        const Curve& mean = tm.model.cross_cov.mean_y;
        out = assemble(date, trend.value, mean, recon - mean, ForecastKind::oracle);
        out.r_hat_used = tm.model.r_hat;
        out.n_train = tm.n;
    } else {
        const TrainedPairModel& am = set.parts.at(0);
        const TrainedPairModel& pm = set.parts.at(1);
        const Curve y_am = slice_am(y_true_residual);
        const Curve y_pm = slice_pm(y_true_residual);
        const Curve rec_am = reconstruct_response(am.model, oracle_scores(y_am, am.model));
        const Curve rec_pm = reconstruct_response(pm.model, oracle_scores(y_pm, pm.model));
        const Curve mean = join_halves(am.model.cross_cov.mean_y, pm.model.cross_cov.mean_y);
        const Curve corr = join_halves(rec_am - am.model.cross_cov.mean_y,
                                       rec_pm - pm.model.cross_cov.mean_y);
        out = assemble(date, trend.value, mean, corr, ForecastKind::oracle);
        out.r_hat_used = am.model.r_hat;
        out.n_train = am.n;
        out.r_hat_pm = pm.model.r_hat;
        out.n_train_pm = pm.n;
    }
    if (trend.extrapolated) out.flags.push_back("gam_extrapolated");
    return out;
}

ForecastResult forecast_baseline(const Date& date, const ModelRegistry& registry,
                                 const GamModel& gam, const WeeklyRecord& week) {
    const GamPrediction trend = predict_gam_ex(gam, week);
    Curve mean;
    int n_train = 0;
    std::vector<std::string> flags;
    const PairKey key{classify_day(add_days(date, -1)), classify_day(date)};
    const auto it = registry.models.find(key);
    if (it != registry.models.end()) {
        if (!registry.spec.half_day()) {
            mean = it->second.parts.at(0).model.cross_cov.mean_y;
        } else {
            mean = join_halves(it->second.parts.at(0).model.cross_cov.mean_y,
                               it->second.parts.at(1).model.cross_cov.mean_y);
        }
        n_train = it->second.parts.at(0).n;
    } else {
        const auto cit = registry.class_means.find(classify_day(date));
        if (cit == registry.class_means.end())
            throw ModelUnavailable("no class mean for " + to_string(classify_day(date)));
        mean = cit->second.mean;
        n_train = cit->second.n;
        flags.push_back("class_mean");
    }
    ForecastResult out =
        assemble(date, trend.value, mean, mean.scaled(0.0), ForecastKind::baseline);
    out.n_train = n_train;
    out.flags = std::move(flags);
    if (trend.extrapolated) out.flags.push_back("gam_extrapolated");
    return out;
}

std::string to_string(Cadence c) {
    switch (c) {
        case Cadence::once: return "once";
        case Cadence::per_week: return "per-week";
        case Cadence::per_day: return "per-day";
    }
    return "?";
}

Cadence cadence_from_string(const std::string& s) {
    if (s == "once") return Cadence::once;
    if (s == "per-week") return Cadence::per_week;
    if (s == "per-day") return Cadence::per_day;
    throw ConfigError("unknown cadence '" + s + "' (expected once, per-week, per-day)");
}

Backtest::Backtest(HalfHourlySeries load, WeatherSeries weather, std::set<Date> holidays,
                   Options options)
    : load_(std::move(load)), weather_(std::move(weather)), holidays_(std::move(holidays)),
      options_(std::move(options)) {
    load_.validate();
    weather_.validate();
    if (!(weather_.start_date == load_.start_date) || weather_.days() < load_.days())
        throw AlignmentError("Backtest: weather must cover the load series");
}

bool Backtest::in_series(const Date& date) const {
    const std::int64_t idx = days_between(load_.start_date, date);
    return idx >= 0 && idx < load_.days();
}

Curve Backtest::day_observation(const Date& date) const {
    const std::int64_t idx = days_between(load_.start_date, date);
    if (idx < 0 || idx >= load_.days())
        throw MissingData("Backtest: no load observations for " + format_date(date));
    return Curve(day_grid(),
                 Eigen::Map<const Eigen::VectorXd>(load_.values.data() + idx * 48, 48));
}

void Backtest::refit(const Date& train_end) {
    if (fitted_ && fitted_end_ == train_end) return;
    const Date begin = std::max(options_.train_begin, load_.start_date);
    const std::int64_t first = days_between(load_.start_date, begin);
    const std::int64_t last = days_between(load_.start_date, train_end);
    if (first < 0 || last >= load_.days() || last < first)
        throw InsufficientData("Backtest: training window outside the series");

    HalfHourlySeries train_load;
    train_load.start_date = begin;
    train_load.values.assign(load_.values.begin() + first * 48,
                             load_.values.begin() + (last + 1) * 48);
    WeatherSeries train_weather;
    train_weather.start_date = weather_.start_date;
    train_weather.temp_c.assign(weather_.temp_c.begin(),
                                weather_.temp_c.begin() + (days_between(weather_.start_date,
                                                                        train_end) + 1) * 48);
    train_weather.cloud_cover.assign(weather_.cloud_cover.begin(),
                                     weather_.cloud_cover.begin() +
                                         (days_between(weather_.start_date, train_end) + 1) * 48);
    // weekly_aggregate wants identical start dates; re-anchor the weather.
    const std::int64_t skip = days_between(weather_.start_date, begin);
    train_weather.temp_c.erase(train_weather.temp_c.begin(),
                               train_weather.temp_c.begin() + skip * 48);
    train_weather.cloud_cover.erase(train_weather.cloud_cover.begin(),
                                    train_weather.cloud_cover.begin() + skip * 48);
    train_weather.start_date = begin;

    records_ = weekly_aggregate(train_load, train_weather);
    if (records_.size() < 10)
        throw InsufficientData("Backtest: need more complete training weeks, got " +
                               std::to_string(records_.size()));
    first_week_monday_ = add_days(records_.front().week_start, -7);
    gam_ = fit_gam(records_, preset_terms(options_.preset), options_.gam_options);
    const std::map<Date, Curve> residuals = detrend(train_load, gam_, records_);
    registry_ = fit_all_models(residuals, &weather_, holidays_, options_.spec, options_.dim,
                               options_.K, options_.n_min, options_.workers);
    fitted_ = true;
    fitted_end_ = train_end;
}

void Backtest::fit() { refit(options_.train_end); }

void Backtest::install(GamModel gam, ModelRegistry registry) {
    // Records are rebuilt so the week indexing matches the installed model.
    gam_ = std::move(gam);
    registry_ = std::move(registry);
    const Date begin = std::max(options_.train_begin, load_.start_date);
    HalfHourlySeries train_load;
    const std::int64_t first = days_between(load_.start_date, begin);
    const std::int64_t last = days_between(load_.start_date, options_.train_end);
    train_load.start_date = begin;
    train_load.values.assign(load_.values.begin() + first * 48,
                             load_.values.begin() + (last + 1) * 48);
    WeatherSeries train_weather = weather_;
    const std::int64_t skip = days_between(weather_.start_date, begin);
    train_weather.temp_c.erase(train_weather.temp_c.begin(),
                               train_weather.temp_c.begin() + skip * 48);
    train_weather.cloud_cover.erase(train_weather.cloud_cover.begin(),
                                    train_weather.cloud_cover.begin() + skip * 48);
    train_weather.start_date = begin;
    train_weather.temp_c.resize(static_cast<std::size_t>(train_load.days()) * 48);
    train_weather.cloud_cover.resize(static_cast<std::size_t>(train_load.days()) * 48);
    records_ = weekly_aggregate(train_load, train_weather);
    first_week_monday_ = add_days(records_.front().week_start, -7);
    fitted_ = true;
    fitted_end_ = options_.train_end;
}

WeeklyRecord Backtest::record_for_week(const Date& monday, const Date& asof) {
    // Training weeks are answered from the fitted records.
    for (const auto& r : records_)
        if (r.week_start == monday) return r;

    WeeklyRecord r;
    r.week_start = monday;
    r.t = static_cast<int>(days_between(first_week_monday_, monday) / 7);
    r.offset = expert_offset(monday);
    r.week_of_year = iso_week_number(monday);

    auto week_means = [&](const Date& ws, double& temp, double& cloud) {
        const std::int64_t off = days_between(weather_.start_date, ws);
        if (off < 0 || off + 7 > weather_.days())
            throw MissingData("record_for_week: weather does not cover week of " +
                              format_date(ws));
        temp = cloud = 0.0;
        for (int k = 0; k < 336; ++k) {
            temp += weather_.temp_c[static_cast<std::size_t>(off * 48 + k)];
            cloud += weather_.cloud_cover[static_cast<std::size_t>(off * 48 + k)];
        }
        temp /= 336.0;
        cloud /= 336.0;
    };
    double cl;
    week_means(monday, r.temp, r.cloud);
    double tp;
    week_means(add_days(monday, -7), tp, cl);
    r.temp_prev = tp;

    // Lagged load: observed when the previous week closed at or before asof,
    // otherwise the trend model's own prediction for that week.
    const Date prev_monday = add_days(monday, -7);
    const Date prev_end = add_days(monday, -1);
    if (prev_end <= asof && in_series(prev_monday) && in_series(prev_end)) {
        const std::int64_t off = days_between(load_.start_date, prev_monday);
        double acc = 0.0;
        for (int k = 0; k < 336; ++k)
            acc += load_.values[static_cast<std::size_t>(off * 48 + k)];
        r.load_prev = acc / 336.0;
    } else {
        r.load_prev = trend_for_week(prev_monday, asof);
    }
    r.load = 1.0; // unused for prediction records
    return r;
}

double Backtest::trend_for_week(const Date& monday, const Date& asof) {
    return predict_gam(gam_, record_for_week(monday, asof));
}

Curve Backtest::observed_residual(const Date& date, const Date& asof) {
    if (date > asof)
        throw MissingData("observed_residual: " + format_date(date) + " is after asof " +
                          format_date(asof));
    const Curve obs = day_observation(date);
    const double trend = trend_for_week(week_start(date), asof);
    return Curve(day_grid(), obs.values().array() - trend);
}

std::vector<ForecastResult> Backtest::forecast_multi_step(const Date& start_date, int horizon) {
    if (horizon < 1) throw Error("forecast_multi_step: horizon must be >= 1");
    if (!fitted_) throw Error("forecast_multi_step: call fit() first");
    const Date asof = add_days(start_date, -1);
    Curve prev_residual = observed_residual(asof, asof);

    std::vector<ForecastResult> chain;
    for (int k = 0; k < horizon; ++k) {
        const Date target = add_days(start_date, k);
        DayInputs inputs;
        inputs.week = record_for_week(week_start(target), asof);
        inputs.prev_residual = prev_residual;
        if (options_.spec.uses_temperature())
            inputs.temperature = temperature_curve(weather_, target);
        ForecastResult res;
        try {
            res = forecast_day(target, registry_, gam_, inputs);
        } catch (const ModelUnavailable&) {
            res = forecast_baseline(target, registry_, gam_, inputs.week);
            res.kind = ForecastKind::hybrid;
            res.flags.push_back("fallback_baseline");
        }
        res.step = k + 1;
        // Next step's regressor: predicted residual = mean + correction.
        prev_residual = Curve(day_grid(), res.mean_component.values() +
                                              res.correction_component.values());
        chain.push_back(std::move(res));
    }
    return chain;
}

std::vector<ForecastResult> Backtest::forecast_range(const Date& first, const Date& last,
                                                     int horizon,
                                                     const std::set<ForecastKind>& kinds) {
    if (!fitted_ && options_.cadence == Cadence::once) fit();
    std::vector<ForecastResult> out;
    for (Date d = first; d <= last; d = add_days(d, 1)) {
        if (holidays_.count(d)) continue;
        const Date asof = add_days(d, -static_cast<std::int64_t>(horizon));
        switch (options_.cadence) {
            case Cadence::once:
                if (!fitted_) fit();
                break;
            case Cadence::per_week:
                refit(std::max(options_.train_end, add_days(week_start(d), -1)));
                break;
            case Cadence::per_day:
                refit(std::max(options_.train_end, asof));
                break;
        }
        const bool violation = !(fitted_end_ < d);

        if (kinds.count(ForecastKind::hybrid)) {
            auto chain = forecast_multi_step(add_days(d, 1 - horizon), horizon);
            ForecastResult res = std::move(chain.back());
            if (violation) ++audit_violations_;
            out.push_back(std::move(res));
        }
        if (kinds.count(ForecastKind::baseline)) {
            const WeeklyRecord week = record_for_week(week_start(d), asof);
            ForecastResult res = forecast_baseline(d, registry_, gam_, week);
            res.step = horizon;
            if (violation) ++audit_violations_;
            out.push_back(std::move(res));
        }
        if (kinds.count(ForecastKind::oracle)) {
            const WeeklyRecord week = record_for_week(week_start(d), asof);
            const Curve y_true = observed_residual(d, d);
            ForecastResult res;
            try {
                res = forecast_oracle(d, y_true, registry_, gam_, week);
            } catch (const ModelUnavailable&) {
                res = forecast_baseline(d, registry_, gam_, week);
                res.kind = ForecastKind::oracle;
                res.flags.push_back("fallback_baseline");
            }
            res.step = horizon;
            if (violation) ++audit_violations_;
            out.push_back(std::move(res));
        }
    }
    return out;
}

} // namespace loadfc
