#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loadfc/metrics.hpp"

#include <cmath>
#include <random>

using namespace loadfc;

TEST_CASE("mape exact values") {
    CHECK(mape({100.0}, {100.0}) == 0.0);
    CHECK(mape({102.0}, {100.0}) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(std::abs(mape({110.0, 95.0}, {100.0, 100.0}) - 0.075) < 1e-12);
    CHECK_THROWS_AS(mape({1.0}, {0.0}), ZeroDenominator);
    CHECK_THROWS_AS(mape({1.0, 2.0}, {1.0}), AlignmentError);
    CHECK_THROWS_AS(mape({}, {}), EmptyInput);
}

TEST_CASE("rmse exact values") {
    CHECK(rmse({100.0}, {100.0}) == 0.0);
    CHECK(std::abs(rmse({103.0, 99.0}, {100.0, 100.0}) - std::sqrt(5.0)) < 1e-12);
    CHECK(rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
}

TEST_CASE("randomized properties: scale invariance and linear scaling") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> val(10.0, 1000.0);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    std::uniform_int_distribution<int> len(1, 20);
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = len(rng);
        std::vector<double> pred(n), truth(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = val(rng);
            truth[i] = val(rng);
        }
        const double c = scale(rng);
        std::vector<double> pred_c(n), truth_c(n);
        for (int i = 0; i < n; ++i) {
            pred_c[i] = c * pred[i];
            truth_c[i] = c * truth[i];
        }
        CHECK(mape(pred_c, truth_c) == doctest::Approx(mape(pred, truth)).epsilon(1e-9));
        CHECK(rmse(pred_c, truth_c) == doctest::Approx(c * rmse(pred, truth)).epsilon(1e-9));
        CHECK(rmse(pred, truth) >= 0.0);
        if (pred != truth) CHECK(rmse(pred, truth) > 0.0);
    }
}

TEST_CASE("aggregation: groups partition days and re-aggregate to overall") {
    std::vector<DayMetrics> days;
    days.push_back({Date{2000, 1, 3}, 0.01, 100.0, "hybrid"});
    days.push_back({Date{2000, 1, 10}, 0.03, 200.0, "hybrid"});
    days.push_back({Date{2000, 2, 7}, 0.05, 300.0, "hybrid"});
    const EvalReport report = aggregate_report(days);
    CHECK(report.overall.count == 3);
    CHECK(report.overall.mape == doctest::Approx(0.03).epsilon(1e-14));
    CHECK(report.by_month.at(1).mape == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(report.by_month.at(1).count == 2);
    CHECK(report.by_month.at(2).count == 1);

    // Weighted means of group rows reproduce the overall within 1e-12.
    double acc = 0.0;
    int n = 0;
    for (const auto& [m, g] : report.by_month) {
        acc += g.mape * g.count;
        n += g.count;
    }
    CHECK(acc / n == doctest::Approx(report.overall.mape).epsilon(1e-12));

    double acc_dt = 0.0;
    int n_dt = 0;
    for (const auto& [t, g] : report.by_day_type) {
        acc_dt += g.rmse * g.count;
        n_dt += g.count;
    }
    CHECK(n_dt == 3);
    CHECK(acc_dt / n_dt == doctest::Approx(report.overall.rmse).epsilon(1e-12));
}

TEST_CASE("aggregation is permutation invariant") {
    std::vector<DayMetrics> days;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 40; ++i)
        days.push_back({add_days(Date{2001, 1, 1}, i), u(rng), 100 * u(rng), "hybrid"});
    auto shuffled = days;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const EvalReport a = aggregate_report(days);
    const EvalReport b = aggregate_report(shuffled);
    CHECK(a.overall.mape == doctest::Approx(b.overall.mape).epsilon(1e-12));
    CHECK(a.overall.rmse == doctest::Approx(b.overall.rmse).epsilon(1e-12));
    for (const auto& [m, g] : a.by_month) CHECK(b.by_month.at(m).count == g.count);
}
