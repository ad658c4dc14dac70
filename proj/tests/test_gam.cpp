#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loadfc/datagen.hpp"
#include "loadfc/gam.hpp"

#include <cmath>

using namespace loadfc;

namespace {

// Simple weekly records with exogenous covariates for component tests.
std::vector<WeeklyRecord> synthetic_records(int n, std::uint64_t seed,
                                            const std::function<double(const WeeklyRecord&)>& f,
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
        const double season = std::cos(2.0 * 3.14159265358979 * r.week_of_year / 52.0);
        r.temp = 12.0 - 8.0 * season + 1.5 * rng.normal();
        r.temp_prev = 12.0 - 8.0 * season + 1.5 * rng.normal();
        r.cloud = std::clamp(0.5 + 0.2 * rng.normal(), 0.0, 1.0);
        r.load_prev = 50000.0 + 4000.0 * season + 800.0 * rng.normal();
        r.load = f(r) + noise_sd * rng.normal();
        records.push_back(r);
        monday = add_days(monday, 7);
    }
    return records;
}

} // namespace

TEST_CASE("build_design dimensions after centering") {
    auto records = synthetic_records(10, 1, [](const WeeklyRecord&) { return 100.0; }, 1.0);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 5, 0,
                 KnotRule::uniform}};
    const GamDesign design = build_design(records, specs);
    CHECK(design.design.rows() == 10);
    CHECK(design.design.cols() == 4); // basis_dim 5 minus the centering constraint
    CHECK(design.terms[0].penalty.rows() == 4);

    // Tensor term: 6 x 6 = 36 columns before the constraint, 35 after.
    std::vector<TermSpec> tensor{
        TermSpec{TermKind::tensor, Covariate::load_prev, Covariate::week_index, 6, 6,
                 KnotRule::uniform}};
    const GamDesign td = build_design(records, tensor);
    CHECK(td.terms[0].raw_dim() == 36);
    CHECK(td.design.cols() == 35);
}

TEST_CASE("degenerate covariate raises") {
    auto records = synthetic_records(10, 2, [](const WeeklyRecord&) { return 100.0; }, 1.0);
    for (auto& r : records) r.cloud = 0.5;
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::cloud, Covariate::week_index, 5, 0,
                 KnotRule::uniform}};
    CHECK_THROWS_AS(build_design(records, specs), DegenerateCovariate);
}

TEST_CASE("known-function recovery: sin on one covariate") {
    const double pi = 3.14159265358979323846;
    auto truth = [&](const WeeklyRecord& r) {
        const double x = (r.temp - 4.0) / 16.0; // roughly [0,1]
        return 10.0 + std::sin(2.0 * pi * x);
    };
    auto records = synthetic_records(676, 3, truth, 0.1);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 16, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    double se = 0.0;
    for (const auto& r : records) {
        const double fitted = predict_gam(model, r);
        const double target = truth(r);
        se += (fitted - target) * (fitted - target);
    }
    CHECK(std::sqrt(se / records.size()) <= 0.05);
}

TEST_CASE("pure-noise response is smoothed to near-constant") {
    auto records = synthetic_records(300, 4, [](const WeeklyRecord&) { return 100.0; }, 1.0);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 12, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    // Oversmoothing: the fitted values carry well under 10% of the noise
    // variance, and the search lands on the top of the lambda grid.
    double mean_fit = 0.0;
    std::vector<double> fits;
    for (const auto& r : records) {
        fits.push_back(predict_gam(model, r));
        mean_fit += fits.back();
    }
    mean_fit /= records.size();
    double var_fit = 0.0;
    for (double f : fits) var_fit += (f - mean_fit) * (f - mean_fit);
    var_fit /= records.size();
    CHECK(var_fit < 0.1 * 1.0);
    // Deep smoothing: the term is driven into its null space, a few df only.
    CHECK(model.terms[0].lambda_smooth > 1e2);
    CHECK(model.edf < 4.5);
}

TEST_CASE("fitted smooths sum to zero over the training sample") {
    auto records = synthetic_records(200, 5, [](const WeeklyRecord& r) {
        return 50.0 + 0.002 * r.load_prev + 0.3 * r.temp;
    }, 0.5);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::load_prev, Covariate::week_index, 8, 0,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    for (std::size_t j = 0; j < model.terms.size(); ++j) {
        double sum = 0.0, scale = 0.0;
        for (const auto& r : records) {
            const double v = term_value(model, j, r);
            sum += v;
            scale = std::max(scale, std::abs(v));
        }
        CHECK(std::abs(sum) < 1e-8 * records.size() * std::max(scale, 1.0));
    }
}

TEST_CASE("lambda -> infinity drives a univariate smooth to its least-squares line") {
    auto records = synthetic_records(150, 6, [](const WeeklyRecord& r) {
        return 20.0 + 0.5 * r.temp + 0.05 * r.temp * r.temp;
    }, 0.2);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 10, 0,
                 KnotRule::uniform}};
    GamFitOptions options;
    options.fixed_lambda = 1e8;
    const GamModel model = fit_gam(records, specs, options);

    // Ordinary least squares line on the same data.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(records.size());
    for (const auto& r : records) {
        sx += r.temp;
        sy += r.load;
        sxx += r.temp * r.temp;
        sxy += r.temp * r.load;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    for (int i = 0; i < n; i += 17) {
        const double fitted = predict_gam(model, records[i]);
        const double line = icept + slope * records[i].temp;
        CHECK(fitted == doctest::Approx(line).epsilon(1e-4));
    }
}

TEST_CASE("prediction consistency and extrapolation flag") {
    auto records = synthetic_records(120, 7, [](const WeeklyRecord& r) {
        return 100.0 + 0.4 * r.temp;
    }, 0.3);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    const GamPrediction in_range = predict_gam_ex(model, records[5]);
    CHECK_FALSE(in_range.extrapolated);

    WeeklyRecord far = records[5];
    far.temp = 999.0;
    const GamPrediction out = predict_gam_ex(model, far);
    CHECK(out.extrapolated);
    // Linear extension: equal increments beyond the boundary.
    WeeklyRecord a = far, b = far, c = far;
    a.temp = 40.0;
    b.temp = 45.0;
    c.temp = 50.0;
    const double d1 = predict_gam(model, b) - predict_gam(model, a);
    const double d2 = predict_gam(model, c) - predict_gam(model, b);
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-6));
}

TEST_CASE("constant-response training set predicts the constant") {
    auto records = synthetic_records(80, 8, [](const WeeklyRecord&) { return 77.0; }, 0.0);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 6, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    for (int i = 0; i < 80; i += 13)
        CHECK(predict_gam(model, records[i]) == doctest::Approx(77.0).epsilon(1e-8));
}

TEST_CASE("september knot rule places one anchor per year") {
    auto records = synthetic_records(4 * 52, 12, [](const WeeklyRecord& r) {
        return 100.0 + 0.01 * r.t;
    }, 0.3);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::week_t, Covariate::week_index, 12, 0,
                 KnotRule::september}};
    const GamDesign design = build_design(records, specs);

    int septembers = 0;
    for (const auto& r : records) {
        for (int i = 0; i < 7; ++i) {
            const Date d = add_days(r.week_start, i);
            if (d.month == 9 && d.day == 1 && r.t > records.front().t &&
                r.t < records.back().t)
                ++septembers;
        }
    }
    // from_anchors: interior anchors + 2 endpoints + order - 2 basis funcs.
    CHECK(design.terms[0].basis1.size() == septembers + 2 + 2);
}

TEST_CASE("gcv search never worsens the starting point") {
    auto records = synthetic_records(250, 9, [](const WeeklyRecord& r) {
        return 60.0 + 0.01 * r.load_prev + 2.0 * std::sin(r.temp / 3.0);
    }, 1.0);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::load_prev, Covariate::week_index, 8, 0,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 10, 0,
                 KnotRule::uniform}};
    const GamModel searched = fit_gam(records, specs);
    GamFitOptions start;
    start.fixed_lambda = std::pow(10.0, -7.0 + 14.0 * 15 / 29.0); // the search's start point
    const GamModel fixed = fit_gam(records, specs, start);
    CHECK(searched.gcv <= fixed.gcv + 1e-9);
    CHECK(searched.edf >= 1.0);
    CHECK(searched.edf <= static_cast<double>(2 + 7 + 9));
    CHECK(std::isfinite(searched.gcv));
}

TEST_CASE("compare_models: identical specs tie, interaction truth favors tensor spec") {
    const double pi = 3.14159265358979323846;
    // Truth with a genuine (load_prev x week_index) interaction.
    auto truth = [&](const WeeklyRecord& r) {
        const double seas = std::cos(2.0 * pi * r.week_of_year / 52.0);
        return 50.0 + 0.004 * (r.load_prev - 50000.0) * (1.0 + 0.8 * seas) + 0.5 * r.temp;
    };
    auto records = synthetic_records(500, 10, truth, 0.8);

    std::vector<TermSpec> uni{
        TermSpec{TermKind::univariate, Covariate::load_prev, Covariate::week_index, 8, 0,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};
    std::vector<TermSpec> tensor{
        TermSpec{TermKind::tensor, Covariate::load_prev, Covariate::week_index, 6, 6,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};

    const ModelComparison same = compare_models(records, uni, uni);
    CHECK(same.first.gcv == doctest::Approx(same.second.gcv).epsilon(1e-12));
    CHECK(same.first.holdout.mape == doctest::Approx(same.second.holdout.mape).epsilon(1e-12));

    const ModelComparison cmp = compare_models(records, uni, tensor);
    CHECK(cmp.gcv_winner == 1);
    CHECK(cmp.second.gcv < cmp.first.gcv);
    const std::string report = format_comparison(cmp);
    CHECK(report.find("gcv winner: spec2") != std::string::npos);
}

TEST_CASE("holdout error stays within twice the in-sample error on additive truth") {
    auto truth = [](const WeeklyRecord& r) {
        return 80.0 + 0.002 * r.load_prev + 1.5 * std::cos(r.temp / 4.0);
    };
    auto records = synthetic_records(400, 11, truth, 0.5);
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::load_prev, Covariate::week_index, 8, 0,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};
    const ModelComparison cmp = compare_models(records, specs, specs);
    CHECK(cmp.first.holdout.mape < 2.0 * cmp.first.in_sample.mape);
}

TEST_CASE("collinear terms trigger the ridge fallback and still fit") {
    auto records = synthetic_records(120, 13, [](const WeeklyRecord& r) {
        return 90.0 + 0.5 * r.temp;
    }, 0.2);
    // The same covariate twice: identical blocks make the normal equations
    // singular along the shared penalty null space.
    std::vector<TermSpec> specs{
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform},
        TermSpec{TermKind::univariate, Covariate::temp, Covariate::week_index, 8, 0,
                 KnotRule::uniform}};
    const GamModel model = fit_gam(records, specs);
    CHECK(std::isfinite(model.gcv));
    CHECK(std::isfinite(predict_gam(model, records[3])));
}

TEST_CASE("weekly record validation") {
    WeeklyRecord r;
    r.week_start = Date{1996, 1, 8};
    r.t = 1;
    r.load = 100.0;
    r.week_of_year = 2;
    r.offset = 0;
    CHECK_NOTHROW(r.validate());
    r.offset = 9;
    CHECK_THROWS_AS(r.validate(), Error);
    r.offset = 0;
    r.week_of_year = 54;
    CHECK_THROWS_AS(r.validate(), Error);
    r.week_of_year = 1;
    r.load = -5.0;
    CHECK_THROWS_AS(r.validate(), Error);
}
