// Acceptance suite: one criterion per function, one pass/fail line each.
// Exit code = number of failed criteria.

#include "loadfc/commands.hpp"
#include "loadfc/csv.hpp"
#include "loadfc/datagen.hpp"
#include "loadfc/gam.hpp"
#include "loadfc/metrics.hpp"
#include "loadfc/pipeline.hpp"
#include "loadfc/store.hpp"
#include "loadfc/svdreg.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace loadfc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double loglog_slope(const std::vector<double>& ns, const std::vector<double>& ys) {
    const int n = static_cast<int>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::log(ns[i]);
        const double y = std::log(ys[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: reduction to scalar regressions reproduces the brute-force
// discretized least-squares curve regression at full rank.
// ---------------------------------------------------------------------------

Outcome criterion1() {
    datagen::Rng rng(41);
    const int m = 4, n = 50;
    auto gy = Grid::uniform(0.0, 1.0, m);
    auto gx = Grid::uniform(0.0, 2.0, m);
    Eigen::MatrixXd b_true(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) b_true(i, j) = rng.normal();
    const Eigen::VectorXd w2 = gx->weights();
    CurveSample s;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x(m);
        for (int k = 0; k < m; ++k) x(k) = rng.normal() + 0.5;
        Eigen::VectorXd y = b_true * (w2.array() * x.array()).matrix();
        s.regressors.emplace_back(gx, std::move(x));
        s.responses.emplace_back(gy, std::move(y));
    }

    // Full-rank reduction: r = K = d = 4, coefficients by OLS on the scores.
    CurveRegressionModel model;
    model.cross_cov = estimate_cross_cov(s, m);
    model.r_hat = m;
    model.n_regressor_terms = m;
    {
        Eigen::MatrixXd xi(n, m), eta(n, m);
        for (int i = 0; i < n; ++i) {
            xi.row(i) =
                scores(s.responses[i], model.cross_cov.phis, model.cross_cov.mean_y).transpose();
            eta.row(i) =
                scores(s.regressors[i], model.cross_cov.psis, model.cross_cov.mean_x).transpose();
        }
        model.betas = eta.colPivHouseholderQr().solve(xi).transpose();
        model.residual_variances = Eigen::VectorXd::Zero(m);
    }

    // Independent oracle: per-grid-point weighted least squares.
    Eigen::VectorXd mean_x = Eigen::VectorXd::Zero(m), mean_y = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
        mean_x += s.regressors[i].values();
        mean_y += s.responses[i].values();
    }
    mean_x /= n;
    mean_y /= n;
    Eigen::MatrixXd z(n, m), yc(n, m);
    for (int i = 0; i < n; ++i) {
        z.row(i) = ((s.regressors[i].values() - mean_x).array() * w2.array()).transpose();
        yc.row(i) = (s.responses[i].values() - mean_y).transpose();
    }
    const Eigen::MatrixXd b_hat = z.fullPivHouseholderQr().solve(yc).transpose();

    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x(m);
        for (int k = 0; k < m; ++k) x(k) = rng.normal() + 0.5;
        const Curve xc(gx, x);
        const Eigen::VectorXd via_svd = predict_response_curve(model, xc).values();
        const Eigen::VectorXd via_brute =
            mean_y + b_hat * (w2.array() * (x - mean_x).array()).matrix();
        worst = std::max(worst, (via_svd - via_brute).norm() / via_brute.norm());
    }
    return {worst < 1e-6, fmt("max relative L2 deviation %.3e over 20 held-out regressors", worst)};
}

// ---------------------------------------------------------------------------
// Criterion 2: eigenvalue error rates. Median spurious eigenvalue decays
// like 1/n, median leading-eigenvalue error like 1/sqrt(n).
// ---------------------------------------------------------------------------

Outcome criterion2() {
    const std::vector<int> sizes{100, 400, 1600};
    const int reps = 50;
    std::vector<double> med_spurious, med_err1;
    double lambda1_true = 0.0;
    for (int n : sizes) {
        std::vector<double> spurious, err1;
        for (int rep = 0; rep < reps; ++rep) {
            datagen::ReferencePairsConfig cfg;
            cfg.n = n;
            cfg.true_r = 3;
            cfg.seed = 1000 + 17 * static_cast<std::uint64_t>(rep) + n;
            const datagen::ReferencePairs ref = datagen::reference_pairs(cfg);
            lambda1_true = ref.true_lambdas(0);
            const CrossCovModel model = estimate_cross_cov(ref.sample, 4);
            spurious.push_back(model.lambdas(3));
            err1.push_back(std::abs(model.lambdas(0) - lambda1_true));
        }
        med_spurious.push_back(median(spurious));
        med_err1.push_back(median(err1));
    }
    const std::vector<double> ns(sizes.begin(), sizes.end());
    const double slope4 = loglog_slope(ns, med_spurious);
    const double slope1 = loglog_slope(ns, med_err1);
    const bool pass = slope4 >= -1.3 && slope4 <= -0.7 && slope1 >= -0.8 && slope1 <= -0.3;
    return {pass, fmt("lambda_4 slope %.3f (want [-1.3,-0.7]), |lambda_1 - %.2f| slope %.3f "
                      "(want [-0.8,-0.3])",
                      slope4, lambda1_true, slope1)};
}

// ---------------------------------------------------------------------------
// Criterion 3: dimension recovery by the ratio estimator and by IC2 with
// majority voting, r = 1..6, n = 500, d = 12, >= 90/100 seeded runs each.
// ---------------------------------------------------------------------------

Outcome criterion3() {
    const int n = 500, d = 12, runs = 100;
    std::string detail;
    bool pass = true;
    for (int r = 1; r <= 6; ++r) {
        int ok_ratio = 0, ok_majority = 0;
        for (int run = 0; run < runs; ++run) {
            datagen::ReferencePairsConfig cfg;
            cfg.n = n;
            cfg.true_r = r;
            cfg.seed = 20000 + 131 * static_cast<std::uint64_t>(run) + r;
            const datagen::ReferencePairs ref = datagen::reference_pairs(cfg);
            const CrossCovModel model = estimate_cross_cov(ref.sample, d + 1);
            if (select_dim_ratio(model.lambdas, d) == r) ++ok_ratio;
            DimSelectConfig sel;
            sel.d = d;
            const auto [q, diag] = select_dim_majority(model.lambdas, n, sel);
            if (q == r) ++ok_majority;
        }
        detail += fmt("r=%d ratio %d/100 majority %d/100; ", r, ok_ratio, ok_majority);
        pass = pass && ok_ratio >= 90 && ok_majority >= 90;
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 4: GAM component recovery and GCV preference for the tensor
// spec when the truth has interactions.
// ---------------------------------------------------------------------------

struct GamTruth {
    std::function<double(const WeeklyRecord&)> component[6];
    double intercept = 52000.0;

    double operator()(const WeeklyRecord& r) const {
        double acc = intercept;
        for (const auto& f : component) acc += f(r);
        return acc;
    }
};

std::vector<WeeklyRecord> gam_records(int n, std::uint64_t seed,
                                      const std::function<double(const WeeklyRecord&)>& truth,
                                      double noise_sd) {
    datagen::Rng rng(seed);
    std::vector<WeeklyRecord> records;
    Date monday{1996, 1, 8};
    for (int i = 0; i < n; ++i) {
        WeeklyRecord r;
        r.week_start = monday;
        r.t = i + 1;
        r.offset = expert_offset(monday);
        r.week_of_year = iso_week_number(monday);
        const double season = std::cos(2.0 * M_PI * r.week_of_year / 52.0);
        r.temp = 12.0 - 9.0 * season + 2.0 * rng.normal();
        r.temp_prev = 12.0 - 9.0 * season + 2.0 * rng.normal();
        r.cloud = std::clamp(0.5 - 0.15 * season + 0.18 * rng.normal(), 0.0, 1.0);
        r.load_prev = 52000.0 + 4000.0 * season + 1200.0 * rng.normal();
        r.load = truth(r) + noise_sd * rng.normal();
        records.push_back(r);
        monday = add_days(monday, 7);
    }
    return records;
}

Outcome criterion4() {
    GamTruth truth;
    truth.component[0] = [](const WeeklyRecord& r) { return 3.5 * r.t; };
    truth.component[1] = [](const WeeklyRecord& r) {
        return 120.0 * r.offset - 25.0 * r.offset * r.offset;
    };
    truth.component[2] = [](const WeeklyRecord& r) {
        return 0.25 * (r.load_prev - 52000.0);
    };
    truth.component[3] = [](const WeeklyRecord& r) {
        return -1500.0 * std::tanh((r.temp - 14.0) / 5.0);
    };
    truth.component[4] = [](const WeeklyRecord& r) {
        return -600.0 * std::tanh((r.temp_prev - 14.0) / 5.0);
    };
    truth.component[5] = [](const WeeklyRecord& r) {
        return 2200.0 * (r.cloud - 0.5) * (r.cloud - 0.5);
    };

    auto records = gam_records(676, 404, [&](const WeeklyRecord& r) { return truth(r); }, 0.0);
    // Noise sd = 2% of the response range.
    double lo = 1e300, hi = -1e300;
    for (const auto& r : records) {
        lo = std::min(lo, r.load);
        hi = std::max(hi, r.load);
    }
    const double noise_sd = 0.02 * (hi - lo);
    datagen::Rng noise(405);
    for (auto& r : records) r.load += noise_sd * noise.normal();

    const GamModel model = fit_gam(records, preset_terms("trend1"));

    bool pass = true;
    std::string detail = fmt("noise sd %.0f; ", noise_sd);
    for (int j = 0; j < 6; ++j) {
        // Compare centered fitted component against centered truth component.
        double mean_true = 0.0, mean_fit = 0.0;
        std::vector<double> tv, fv;
        for (const auto& r : records) {
            tv.push_back(truth.component[j](r));
            fv.push_back(term_value(model, static_cast<std::size_t>(j), r));
            mean_true += tv.back();
            mean_fit += fv.back();
        }
        mean_true /= records.size();
        mean_fit /= records.size();
        double se = 0.0, t_lo = 1e300, t_hi = -1e300;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const double e = (fv[i] - mean_fit) - (tv[i] - mean_true);
            se += e * e;
            t_lo = std::min(t_lo, tv[i]);
            t_hi = std::max(t_hi, tv[i]);
        }
        const double rmse_j = std::sqrt(se / records.size());
        const double range_j = t_hi - t_lo;
        detail += fmt("f%d %.1f/%.1f ", j + 1, rmse_j, 0.05 * range_j);
        pass = pass && rmse_j <= 0.05 * range_j;
    }

    // Interaction truth: the tensor spec must win on GCV.
    auto inter_truth = [&](const WeeklyRecord& r) {
        const double seas = std::cos(2.0 * M_PI * r.week_of_year / 52.0);
        return 52000.0 + 3.0 * r.t + 0.3 * (r.load_prev - 52000.0) * (1.0 + 0.7 * seas) -
               1200.0 * std::tanh((r.temp - 14.0) / 5.0) * (1.0 + 0.5 * seas);
    };
    auto inter_records = gam_records(676, 406, inter_truth, 0.0);
    double ilo = 1e300, ihi = -1e300;
    for (const auto& r : inter_records) {
        ilo = std::min(ilo, r.load);
        ihi = std::max(ihi, r.load);
    }
    datagen::Rng inoise(407);
    for (auto& r : inter_records) r.load += 0.02 * (ihi - ilo) * inoise.normal();
    const GamModel m1 = fit_gam(inter_records, preset_terms("trend1"));
    const GamModel m2 = fit_gam(inter_records, preset_terms("trend2"));
    detail += fmt("; interaction gcv trend1 %.4g vs trend2 %.4g", m1.gcv, m2.gcv);
    pass = pass && m2.gcv < m1.gcv;
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// Criterion 5: predictor ordering and multi-step degradation on a 5-year
// scenario with genuine day-to-day dependence.
// ---------------------------------------------------------------------------

Outcome criterion5() {
    const datagen::ScenarioConfig cfg = datagen::ScenarioConfig::reference(5, 501);
    const datagen::Scenario sc = datagen::generate(cfg);
    std::set<Date> holidays(sc.truth.holidays.begin(), sc.truth.holidays.end());

    Backtest::Options options;
    options.spec.variant = RegressorVariant::H2;
    options.dim.method = DimSelectMethod::ic_majority;
    options.dim.d = 12;
    options.cadence = Cadence::once;
    options.train_begin = sc.load.start_date;
    options.train_end = Date{1999, 12, 31};
    Backtest bt(sc.load, sc.weather, holidays, options);
    bt.fit();

    const Date eval_start{2000, 1, 10};
    const Date eval_end{2000, 12, 15};
    const auto results = bt.forecast_range(eval_start, eval_end, 1,
                                           {ForecastKind::hybrid, ForecastKind::baseline,
                                            ForecastKind::oracle});

    std::map<ForecastKind, std::vector<double>> mapes;
    int days = 0;
    for (const auto& r : results) {
        const std::int64_t idx = days_between(sc.load.start_date, r.date);
        std::vector<double> pred(48), truth(48);
        for (int k = 0; k < 48; ++k) {
            pred[static_cast<std::size_t>(k)] = r.predicted.values()(k);
            truth[static_cast<std::size_t>(k)] =
                sc.load.values[static_cast<std::size_t>(idx) * 48 + k];
        }
        mapes[r.kind].push_back(mape(pred, truth));
        if (r.kind == ForecastKind::hybrid) ++days;
    }
    auto mean_of = [&](ForecastKind k) {
        const auto& v = mapes.at(k);
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / static_cast<double>(v.size());
    };
    const double m_hybrid = mean_of(ForecastKind::hybrid);
    const double m_oracle = mean_of(ForecastKind::oracle);
    const double m_base = mean_of(ForecastKind::baseline);

    // Multi-step: horizons 1..3, hybrid only.
    double step_mape[3] = {0, 0, 0};
    for (int h = 1; h <= 3; ++h) {
        const auto hres = bt.forecast_range(eval_start, eval_end, h, {ForecastKind::hybrid});
        std::vector<double> day_mapes;
        for (const auto& r : hres) {
            const std::int64_t idx = days_between(sc.load.start_date, r.date);
            std::vector<double> pred(48), truth(48);
            for (int k = 0; k < 48; ++k) {
                pred[static_cast<std::size_t>(k)] = r.predicted.values()(k);
                truth[static_cast<std::size_t>(k)] =
                    sc.load.values[static_cast<std::size_t>(idx) * 48 + k];
            }
            day_mapes.push_back(mape(pred, truth));
        }
        double acc = 0.0;
        for (double x : day_mapes) acc += x;
        step_mape[h - 1] = acc / static_cast<double>(day_mapes.size());
    }

    const bool ordering = m_oracle <= 0.9 * m_hybrid && m_hybrid <= 0.9 * m_base;
    const bool monotone = step_mape[0] <= step_mape[1] + 1e-12 &&
                          step_mape[1] <= step_mape[2] + 1e-12;
    const bool enough = days >= 200;
    return {ordering && monotone && enough,
            fmt("%d days; MAPE oracle %.3f%% hybrid %.3f%% baseline %.3f%%; horizons "
                "%.3f%% / %.3f%% / %.3f%%",
                days, 100 * m_oracle, 100 * m_hybrid, 100 * m_base, 100 * step_mape[0],
                100 * step_mape[1], 100 * step_mape[2])};
}

// ---------------------------------------------------------------------------
// Criterion 6: metric exactness plus randomized invariances.
// ---------------------------------------------------------------------------

Outcome criterion6() {
    const double m = mape({110.0, 95.0}, {100.0, 100.0});
    const double r = rmse({103.0, 99.0}, {100.0, 100.0});
    bool pass = std::abs(m - 0.075) < 1e-12 && std::abs(r - std::sqrt(5.0)) < 1e-12;

    std::mt19937 rng(606);
    std::uniform_real_distribution<double> val(5.0, 500.0);
    std::uniform_real_distribution<double> scl(0.01, 100.0);
    std::uniform_int_distribution<int> len(1, 24);
    int failures = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = len(rng);
        std::vector<double> pred(static_cast<std::size_t>(n)),
            truth(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            pred[static_cast<std::size_t>(i)] = val(rng);
            truth[static_cast<std::size_t>(i)] = val(rng);
        }
        const double c = scl(rng);
        std::vector<double> pc = pred, tc = truth;
        for (auto& x : pc) x *= c;
        for (auto& x : tc) x *= c;
        const double rel_m = std::abs(mape(pc, tc) - mape(pred, truth));
        const double rel_r = std::abs(rmse(pc, tc) - c * rmse(pred, truth));
        if (rel_m > 1e-9 * std::max(1.0, mape(pred, truth)) ||
            rel_r > 1e-9 * std::max(1.0, c * rmse(pred, truth)))
            ++failures;
    }
    pass = pass && failures == 0;
    return {pass, fmt("mape %.15f rmse %.15f, %d/1000 property failures", m, r, failures)};
}

// ---------------------------------------------------------------------------
// Criterion 7: classification totality 1996-2031, Sunday subtype months,
// 14-year snapshot.
// ---------------------------------------------------------------------------

Outcome criterion7() {
    long long days = 0;
    bool pass = true;
    for (Date d{1996, 1, 1}; d <= Date{2031, 12, 31}; d = add_days(d, 1)) {
        const DayClass c = classify_day(d);
        ++days;
        if (!is_valid(c)) pass = false;
        if (classify_day(d) != c) pass = false;
        if (weekday(d) == 6) {
            const int want = (d.month == 6 || d.month == 7)  ? 5
                             : d.month == 8                  ? 6
                             : d.month == 12                 ? 7
                                                             : 4;
            if (c.day_type != want) pass = false;
        } else if (c.day_type > 3) {
            pass = false;
        }
    }
    // Snapshot over 1996-2009.
    std::uint64_t hash = 1469598103934665603ULL;
    for (Date d{1996, 1, 1}; d <= Date{2009, 12, 31}; d = add_days(d, 1)) {
        const DayClass c = classify_day(d);
        hash ^= static_cast<std::uint64_t>(c.day_type * 16 + c.segment);
        hash *= 1099511628211ULL;
    }
    const bool snapshot_ok = hash == 0xfb8dffb4c5312137ULL;
    pass = pass && snapshot_ok && days == 13149;
    return {pass, fmt("%lld days classified, snapshot %s", days, snapshot_ok ? "match" : "DIFFERS")};
}

// ---------------------------------------------------------------------------
// Criterion 8: end-to-end determinism and the no-look-ahead audit through
// the command layer.
// ---------------------------------------------------------------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion8() {
    const fs::path base = fs::temp_directory_path() / "loadfc_acceptance8";
    fs::remove_all(base);

    auto run = [&](const std::string& tag) {
        const fs::path dir = base / tag;
        fs::create_directories(dir);
        auto file = [&](const std::string& name) { return (dir / name).string(); };
        {
            std::ofstream conf(file("scenario.conf"));
            conf << "[scenario]\nyears = 5\nseed = 808\n[paths]\nload_csv = "
                 << file("load.csv") << "\nweather_csv = " << file("weather.csv")
                 << "\nholidays = " << file("holidays.txt") << "\ntruth = " << file("truth.txt")
                 << "\n";
        }
        {
            std::ofstream conf(file("run.conf"));
            conf << "[paths]\nload_csv = " << file("load.csv")
                 << "\nweather_csv = " << file("weather.csv")
                 << "\nholidays = " << file("holidays.txt")
                 << "\nmodel_store = " << file("model.store")
                 << "\noutput_dir = " << file("out")
                 << "\n[model]\nvariant = H2\ncadence = once\n[train]\nend = 1999-12-31\n"
                 << "[eval]\nstart = 2000-02-01\nend = 2000-04-30\n"
                 << "emit = hybrid,baseline,oracle\n";
        }
        commands::cmd_simulate(file("scenario.conf"));
        commands::cmd_fit(file("run.conf"));
        const auto fc = commands::cmd_forecast(file("run.conf"));
        const auto ev = commands::cmd_evaluate(fc.forecast_csv, file("load.csv"),
                                               (dir / "out").string());
        (void)ev;
        return std::pair{dir, fc.audit_violations};
    };

    const auto [dir_a, audit_a] = run("a");
    const auto [dir_b, audit_b] = run("b");

    bool identical = true;
    std::string first_diff;
    for (const char* name : {"load.csv", "weather.csv", "holidays.txt", "truth.txt",
                             "model.store", "out/forecast.csv", "out/overall.csv",
                             "out/by_month.csv", "out/by_day_type.csv", "out/per_day.csv",
                             "out/report.txt"}) {
        if (slurp((dir_a / name).string()) != slurp((dir_b / name).string())) {
            identical = false;
            if (first_diff.empty()) first_diff = name;
        }
    }
    fs::remove_all(base);
    const bool pass = identical && audit_a == 0 && audit_b == 0;
    return {pass, fmt("bit-identical %s%s; audit violations %d/%d", identical ? "yes" : "NO ",
                      first_diff.c_str(), audit_a, audit_b)};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"C1 scalar-reduction equivalence vs brute force", 1.0, criterion1},
        {"C2 eigenvalue error decay rates", 60.0, criterion2},
        {"C3 dimension recovery (ratio + voting)", 120.0, criterion3},
        {"C4 trend-model component recovery + GCV order", 0.0, criterion4},
        {"C5 predictor ordering + multi-step degradation", 0.0, criterion5},
        {"C6 metric exactness + invariances", 0.0, criterion6},
        {"C7 day classification totality + snapshot", 0.0, criterion7},
        {"C8 end-to-end determinism + look-ahead audit", 120.0, criterion8},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = outcome.pass;
        std::string budget_note;
        if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
            pass = false;
            budget_note = fmt(" [over %.0fs budget]", c.budget_seconds);
        }
        std::printf("[%s] %s (%.2fs%s) %s\n", pass ? "PASS" : "FAIL", c.name, secs,
                    budget_note.c_str(), outcome.detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    return failed;
}
