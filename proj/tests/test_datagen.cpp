#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loadfc/datagen.hpp"
#include "loadfc/pipeline.hpp"
#include "loadfc/svdreg.hpp"

#include <cmath>

using namespace loadfc;
using namespace loadfc::datagen;

TEST_CASE("rng stream is deterministic") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    Rng c(124);
    bool all_equal = true;
    Rng a2(123);
    for (int i = 0; i < 10; ++i) all_equal = all_equal && (a2.normal() == c.normal());
    CHECK_FALSE(all_equal);
}

TEST_CASE("orthonormal curves are orthonormal in the grid inner product") {
    auto g = Grid::uniform(0.0, 1.0, 48);
    const auto basis = orthonormal_curves(g, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(inner_product(basis[i], basis[j]) ==
                  doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("reference pairs: population lambdas are realized empirically") {
    ReferencePairsConfig cfg;
    cfg.n = 4000;
    cfg.true_r = 3;
    cfg.seed = 77;
    const ReferencePairs ref = reference_pairs(cfg);
    const CrossCovModel model = estimate_cross_cov(ref.sample, 6);
    for (int j = 0; j < 3; ++j)
        CHECK(model.lambdas(j) ==
              doctest::Approx(ref.true_lambdas(j)).epsilon(0.15)); // n^-1/2 noise
    CHECK(model.lambdas(3) < 0.05 * ref.true_lambdas(2));
}

TEST_CASE("scenario generation is bit-identical for equal seeds") {
    const ScenarioConfig cfg = ScenarioConfig::reference(2, 42);
    const Scenario a = generate(cfg);
    const Scenario b = generate(cfg);
    CHECK(a.load.values == b.load.values);
    CHECK(a.weather.temp_c == b.weather.temp_c);
    CHECK(a.weather.cloud_cover == b.weather.cloud_cover);

    ScenarioConfig other = cfg;
    other.seed = 43;
    const Scenario c = generate(other);
    CHECK(a.load.values != c.load.values);
}

TEST_CASE("ground truth decomposition is exact") {
    const ScenarioConfig cfg = ScenarioConfig::reference(2, 7);
    const Scenario sc = generate(cfg);
    REQUIRE(sc.load.days() == 731); // 1996 is a leap year
    for (int i = 0; i < sc.load.days(); i += 37) {
        const Date d = add_days(sc.load.start_date, i);
        const double trend = sc.truth.weekly_trend.at(week_start(d));
        const Eigen::VectorXd& resid = sc.truth.residual_curves.at(d);
        for (int k = 0; k < 48; k += 7) {
            const double reconstructed = trend + resid(k);
            CHECK(sc.load.values[static_cast<std::size_t>(i) * 48 + k] ==
                  doctest::Approx(reconstructed).epsilon(1e-12));
        }
    }
}

TEST_CASE("noiseless rank-1 scenario has vanishing second eigenvalue") {
    ScenarioConfig cfg = ScenarioConfig::reference(2, 5);
    cfg.true_r = 1;
    cfg.factor_sd = Eigen::VectorXd::Constant(1, 1500.0);
    cfg.noise_sd = 0.0;
    const Scenario sc = generate(cfg);

    // Consecutive-day pairs of true residuals, pooled across one class pair
    // to keep the class means constant.
    CurveSample sample;
    auto grid = day_grid();
    for (const auto& [d, resid] : sc.truth.residual_curves) {
        const Date prev = add_days(d, -1);
        if (!sc.truth.residual_curves.count(prev)) continue;
        if (classify_day(d).day_type != 1 || classify_day(prev).day_type != 1) continue;
        sample.responses.emplace_back(grid, resid);
        sample.regressors.emplace_back(grid, sc.truth.residual_curves.at(prev));
    }
    REQUIRE(sample.size() >= 200);
    const CrossCovModel model = estimate_cross_cov(sample, 4);
    CHECK(model.lambdas(1) / model.lambdas(0) < 1e-6);
}

TEST_CASE("flat scenario yields near-constant weekly aggregates") {
    ScenarioConfig cfg = ScenarioConfig::reference(2, 9);
    cfg.trend_slope = 0.0;
    cfg.annual_amplitude = 0.0;
    cfg.heat_gain = 0.0;
    const Scenario sc = generate(cfg);
    const std::vector<WeeklyRecord> records = weekly_aggregate(sc.load, sc.weather);
    double lo = 1e18, hi = -1e18;
    for (const auto& r : records) {
        lo = std::min(lo, r.load);
        hi = std::max(hi, r.load);
    }
    // Weekly averaging shrinks profiles/factors/noise to a small band around
    // the base load.
    CHECK(hi - lo < 0.05 * cfg.base_load);
    CHECK(std::abs((lo + hi) / 2.0 - cfg.base_load) < 0.05 * cfg.base_load);
}

TEST_CASE("population lambda ordering matches the factor construction") {
    const ScenarioConfig cfg = ScenarioConfig::reference(2, 3);
    const Scenario sc = generate(cfg);
    REQUIRE(sc.truth.population_lambdas.size() == 3);
    for (int j = 0; j + 1 < 3; ++j)
        CHECK(sc.truth.population_lambdas(j) >= sc.truth.population_lambdas(j + 1));
    const double expected0 = std::pow(cfg.factor_rho * 1600.0 * 1600.0, 2);
    CHECK(sc.truth.population_lambdas(0) == doctest::Approx(expected0).epsilon(1e-12));
}

TEST_CASE("holiday list covers fixed dates each year") {
    const auto holidays = scenario_holidays(1996, 2);
    CHECK(holidays.size() == 16);
    CHECK(std::count(holidays.begin(), holidays.end(), Date{1996, 7, 14}) == 1);
    CHECK(std::count(holidays.begin(), holidays.end(), Date{1997, 12, 25}) == 1);
}
