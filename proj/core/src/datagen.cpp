#include "loadfc/datagen.hpp"
#include "loadfc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace loadfc {
namespace datagen {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double Rng::uniform() {
    // 53-bit mantissa in [0, 1).
    return (gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
}

std::vector<Curve> orthonormal_curves(const GridPtr& grid, int count, int wave_offset) {
    const Eigen::Index m = grid->size();
    const Eigen::VectorXd& pts = grid->points();
    const double a = pts(0), b = pts(m - 1);
    std::vector<Eigen::VectorXd> basis;
    for (int j = 0; j < count; ++j) {
        Eigen::VectorXd v(m);
        const int wave = j + wave_offset;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double u = (pts(i) - a) / (b - a);
            v(i) = std::sin(wave * kPi * u) + 0.3 * std::cos((wave + 1) * kPi * u);
        }
        basis.push_back(std::move(v));
    }
    // Modified Gram-Schmidt in the weighted inner product.
    const Eigen::VectorXd& w = grid->weights();
    auto dot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return (w.array() * x.array() * y.array()).sum();
    };
    std::vector<Curve> out;
    for (int j = 0; j < count; ++j) {
        Eigen::VectorXd v = basis[static_cast<std::size_t>(j)];
        for (int k = 0; k < j; ++k) {
            const auto& prev = out[static_cast<std::size_t>(k)].values();
            v -= dot(v, prev) * prev;
        }
        const double nrm = std::sqrt(dot(v, v));
        if (nrm < 1e-12) throw Error("orthonormal_curves: basis collapsed");
        v /= nrm;
        out.emplace_back(grid, std::move(v));
    }
    return out;
}

ReferencePairs reference_pairs(const ReferencePairsConfig& cfg) {
    if (cfg.true_r < 1) throw Error("reference_pairs: true_r must be >= 1");
    Rng rng(cfg.seed);
    const GridPtr gy = Grid::uniform(0.0, 1.0, cfg.grid_size_y);
    const GridPtr gx = Grid::uniform(0.0, 1.0, cfg.grid_size_x);
    const std::vector<Curve> us = orthonormal_curves(gy, cfg.true_r);
    const std::vector<Curve> vs = orthonormal_curves(gx, cfg.true_r, 2);

    Eigen::VectorXd theta(cfg.true_r);
    for (int j = 0; j < cfg.true_r; ++j)
        theta(j) = cfg.theta_scale * std::pow(cfg.theta_decay, j);

    ReferencePairs out;
    out.true_lambdas = Eigen::VectorXd::Zero(std::min({cfg.grid_size_x, cfg.grid_size_y, cfg.n}));
    for (int j = 0; j < cfg.true_r && j < out.true_lambdas.size(); ++j)
        out.true_lambdas(j) = theta(j) * theta(j); // unit-variance scores

    // Stationary AR(1) factor scores with unit variance.
    Eigen::VectorXd a(cfg.true_r);
    for (int j = 0; j < cfg.true_r; ++j) a(j) = rng.normal();
    const double innov = std::sqrt(1.0 - cfg.score_rho * cfg.score_rho);
    for (int i = 0; i < cfg.n; ++i) {
        if (i > 0)
            for (int j = 0; j < cfg.true_r; ++j)
                a(j) = cfg.score_rho * a(j) + innov * rng.normal();
        Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg.grid_size_x);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(cfg.grid_size_y);
        for (int j = 0; j < cfg.true_r; ++j) {
            const double b = theta(j) * a(j) + cfg.score_noise_sd * rng.normal();
            x += a(j) * vs[static_cast<std::size_t>(j)].values();
            y += b * us[static_cast<std::size_t>(j)].values();
        }
        for (int k = 0; k < cfg.grid_size_x; ++k) x(k) += cfg.noise_x * rng.normal();
        for (int k = 0; k < cfg.grid_size_y; ++k) y(k) += cfg.noise_y * rng.normal();
        out.sample.regressors.emplace_back(gx, std::move(x));
        out.sample.responses.emplace_back(gy, std::move(y));
    }
    return out;
}

ScenarioConfig ScenarioConfig::reference(int years, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.years = years;
    cfg.seed = seed;
    cfg.true_r = 3;
    cfg.factor_sd = Eigen::VectorXd(3);
    cfg.factor_sd << 1600.0, 1100.0, 750.0;
    return cfg;
}

std::vector<Date> scenario_holidays(int first_year, int years) {
    std::vector<Date> out;
    for (int y = first_year; y < first_year + years; ++y) {
        for (auto [m, d] : {std::pair{1, 1}, {5, 1}, {5, 8}, {7, 14}, {8, 15},
                            {11, 1}, {11, 11}, {12, 25}}) {
            out.push_back(Date{y, m, d});
        }
    }
    return out;
}

std::array<Eigen::VectorXd, 8> default_day_profiles() {
    std::array<Eigen::VectorXd, 8> profiles;
    // Working days: morning/evening double hump; weekends flatter and lower
    // in the morning; Sunday variants differ mildly by season.
    const double amp[8] = {2800, 3000, 2600, 1800, 1500, 1300, 1200, 1700};
    const double phase[8] = {0.05, 0.0, 0.02, 0.15, 0.2, 0.22, 0.25, 0.18};
    for (int t = 0; t < 8; ++t) {
        Eigen::VectorXd p(48);
        for (int k = 0; k < 48; ++k) {
            const double u = (k + 1) / 48.0;
            p(k) = amp[t] * (std::sin(2.0 * kPi * (u - 0.3 - phase[t])) +
                             0.4 * std::sin(4.0 * kPi * (u - 0.1 - phase[t])));
        }
        p.array() -= p.mean();
        profiles[static_cast<std::size_t>(t)] = std::move(p);
    }
    return profiles;
}

Scenario generate(const ScenarioConfig& cfg) {
    if (cfg.true_r < 1) throw Error("generate: true_r must be >= 1");
    if (cfg.factor_sd.size() != cfg.true_r)
        throw Error("generate: factor_sd must have true_r entries");
    if (std::abs(cfg.factor_rho) >= 1.0) throw Error("generate: |factor_rho| must be < 1");

    Rng rng(cfg.seed);
    const Date end{cfg.start.year + cfg.years, cfg.start.month, cfg.start.day};
    const int n_days = static_cast<int>(days_between(cfg.start, end));

    const GridPtr day_grid = Grid::uniform(0.0, 1.0, 48);
    std::vector<Curve> loadings;
    if (cfg.factor_loadings.empty()) {
        loadings = orthonormal_curves(day_grid, cfg.true_r, 3);
    } else {
        if (static_cast<int>(cfg.factor_loadings.size()) != cfg.true_r)
            throw Error("generate: factor_loadings must have true_r entries");
        for (const auto& v : cfg.factor_loadings) loadings.emplace_back(day_grid, v);
    }
    auto profiles = cfg.day_profiles;
    if (profiles[0].size() == 0) profiles = default_day_profiles();
    for (const auto& p : profiles) {
        if (p.size() != 48) throw Error("generate: day profiles must have 48 points");
        if (std::abs(p.mean()) > 1e-8 * std::max(1.0, p.cwiseAbs().maxCoeff()))
            throw Error("generate: day profiles must be zero-mean");
    }

    Scenario sc;
    sc.load.start_date = cfg.start;
    sc.load.values.resize(static_cast<std::size_t>(n_days) * 48);
    sc.weather.start_date = cfg.start;
    sc.weather.temp_c.resize(static_cast<std::size_t>(n_days) * 48);
    sc.weather.cloud_cover.resize(static_cast<std::size_t>(n_days) * 48);
    sc.truth.holidays = scenario_holidays(cfg.start.year, cfg.years);

    // Population cross-covariance of consecutive-day residuals:
    // sum_j rho * sd_j^2 * L_j (x) L_j, hence lambda_j = (rho * sd_j^2)^2.
    Eigen::VectorXd lam(cfg.true_r);
    for (int j = 0; j < cfg.true_r; ++j) {
        const double c = cfg.factor_rho * cfg.factor_sd(j) * cfg.factor_sd(j);
        lam(j) = c * c;
    }
    std::sort(lam.data(), lam.data() + lam.size(), std::greater<double>());
    sc.truth.population_lambdas = lam;

    // Stationary factor scores (variance sd_j^2).
    Eigen::VectorXd a(cfg.true_r);
    for (int j = 0; j < cfg.true_r; ++j) a(j) = cfg.factor_sd(j) * rng.normal();
    const double innov = std::sqrt(1.0 - cfg.factor_rho * cfg.factor_rho);

    // Temperature anomaly AR(1), stationary.
    double anomaly = cfg.temp_ar_sd / std::sqrt(1.0 - cfg.temp_ar_rho * cfg.temp_ar_rho) *
                     rng.normal();

    // First pass: temperatures (the weekly trend needs weekly means).
    std::vector<double> day_temp_mean(static_cast<std::size_t>(n_days));
    for (int i = 0; i < n_days; ++i) {
        const Date d = add_days(cfg.start, i);
        const int doy = static_cast<int>(days_between(Date{d.year, 1, 1}, d));
        anomaly = cfg.temp_ar_rho * anomaly +
                  cfg.temp_ar_sd * std::sqrt(1.0 - cfg.temp_ar_rho * cfg.temp_ar_rho) *
                      rng.normal();
        const double seasonal =
            cfg.temp_base - cfg.temp_annual_amp * std::cos(2.0 * kPi * (doy - 15) / 365.25);
        double mean_acc = 0.0;
        for (int k = 0; k < 48; ++k) {
            const double u = (k + 1) / 48.0;
            const double diurnal = cfg.temp_diurnal_amp * std::sin(2.0 * kPi * (u - 0.4));
            const double v = seasonal + anomaly + diurnal + cfg.temp_noise_sd * rng.normal();
            sc.weather.temp_c[static_cast<std::size_t>(i) * 48 + k] = v;
            mean_acc += v;
            double cl = cfg.cloud_mean + cfg.cloud_sd * rng.normal();
            cl = std::clamp(cl, 0.0, 1.0);
            sc.weather.cloud_cover[static_cast<std::size_t>(i) * 48 + k] = cl;
        }
        day_temp_mean[static_cast<std::size_t>(i)] = mean_acc / 48.0;
    }

    // Weekly trend values on complete Monday weeks (boundary days reuse the
    // nearest computed week).
    std::map<Date, double> weekly_trend;
    for (int i = 0; i < n_days; ++i) {
        const Date d = add_days(cfg.start, i);
        const Date ws = week_start(d);
        if (weekly_trend.count(ws)) continue;
        double temp_acc = 0.0;
        int temp_n = 0;
        for (int k = 0; k < 7; ++k) {
            const std::int64_t off = days_between(cfg.start, add_days(ws, k));
            if (off < 0 || off >= n_days) continue;
            temp_acc += day_temp_mean[static_cast<std::size_t>(off)];
            ++temp_n;
        }
        const double week_temp = temp_n > 0 ? temp_acc / temp_n : cfg.temp_base;
        const double years_in = static_cast<double>(days_between(cfg.start, ws)) / 365.25;
        const int doy = static_cast<int>(days_between(Date{ws.year, 1, 1}, ws));
        const double trend =
            cfg.base_load + cfg.trend_slope * years_in +
            cfg.annual_amplitude * std::cos(2.0 * kPi * (doy - 15) / 365.25) +
            cfg.heat_gain * std::max(0.0, cfg.heat_threshold - week_temp);
        weekly_trend[ws] = trend;
    }
    sc.truth.weekly_trend = weekly_trend;

    for (int i = 0; i < n_days; ++i) {
        const Date d = add_days(cfg.start, i);
        for (int j = 0; j < cfg.true_r; ++j)
            a(j) = cfg.factor_rho * a(j) + innov * cfg.factor_sd(j) * rng.normal();
        const DayClass cls = classify_day(d);
        Eigen::VectorXd resid = profiles[static_cast<std::size_t>(cls.day_type)];
        for (int j = 0; j < cfg.true_r; ++j)
            resid += a(j) * loadings[static_cast<std::size_t>(j)].values();
        for (int k = 0; k < 48; ++k) resid(k) += cfg.noise_sd * rng.normal();
        sc.truth.residual_curves[d] = resid;

        const double trend = weekly_trend.at(week_start(d));
        for (int k = 0; k < 48; ++k)
            sc.load.values[static_cast<std::size_t>(i) * 48 + k] = trend + resid(k);
    }
    sc.load.validate();
    return sc;
}

} // namespace datagen
} // namespace loadfc
