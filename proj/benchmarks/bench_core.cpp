#include <benchmark/benchmark.h>

#include "loadfc/datagen.hpp"
#include "loadfc/gam.hpp"
#include "loadfc/pipeline.hpp"
#include "loadfc/svdreg.hpp"

using namespace loadfc;

static void BM_EstimateCrossCov(benchmark::State& state) {
    datagen::ReferencePairsConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    const datagen::ReferencePairs ref = datagen::reference_pairs(cfg);
    for (auto _ : state) {
        auto model = estimate_cross_cov(ref.sample, 12);
        benchmark::DoNotOptimize(model.lambdas);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EstimateCrossCov)->Arg(100)->Arg(400)->Arg(1600)->Complexity();

static void BM_FitCurveRegression(benchmark::State& state) {
    datagen::ReferencePairsConfig cfg;
    cfg.n = static_cast<int>(state.range(0));
    const datagen::ReferencePairs ref = datagen::reference_pairs(cfg);
    DimSelectConfig sel;
    sel.d = 12;
    for (auto _ : state) {
        auto model = fit_curve_regression(ref.sample, sel, 10);
        benchmark::DoNotOptimize(model.betas);
    }
}
BENCHMARK(BM_FitCurveRegression)->Arg(100)->Arg(400);

static void BM_PredictResponseCurve(benchmark::State& state) {
    const datagen::ReferencePairs ref = datagen::reference_pairs({});
    DimSelectConfig sel;
    sel.d = 12;
    const CurveRegressionModel model = fit_curve_regression(ref.sample, sel, 10);
    const Curve& x = ref.sample.regressors[0];
    for (auto _ : state) {
        auto curve = predict_response_curve(model, x);
        benchmark::DoNotOptimize(curve.values());
    }
}
BENCHMARK(BM_PredictResponseCurve);

static void BM_MajorityVote(benchmark::State& state) {
    const datagen::ReferencePairs ref = datagen::reference_pairs({});
    const CrossCovModel cc = estimate_cross_cov(ref.sample, 12);
    DimSelectConfig sel;
    sel.d = 12;
    for (auto _ : state) {
        auto [q, diag] = select_dim_majority(cc.lambdas, ref.sample.size(), sel);
        benchmark::DoNotOptimize(q);
        benchmark::DoNotOptimize(diag.votes);
    }
}
BENCHMARK(BM_MajorityVote);

static void BM_FitGam(benchmark::State& state) {
    datagen::ScenarioConfig cfg = datagen::ScenarioConfig::reference(4, 7);
    const datagen::Scenario sc = datagen::generate(cfg);
    const std::vector<WeeklyRecord> records = weekly_aggregate(sc.load, sc.weather);
    const std::vector<TermSpec> specs = preset_terms("trend2");
    for (auto _ : state) {
        GamModel model = fit_gam(records, specs);
        benchmark::DoNotOptimize(model.gcv);
    }
}
BENCHMARK(BM_FitGam)->Unit(benchmark::kMillisecond)->Iterations(3);

BENCHMARK_MAIN();
