#include "loadfc/metrics.hpp"

#include <cmath>

namespace loadfc {

double mape(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw AlignmentError("mape: length mismatch");
    if (pred.empty()) throw EmptyInput("mape: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 0.0)
            throw ZeroDenominator("mape: zero truth value at index " + std::to_string(i));
        acc += std::abs((pred[i] - truth[i]) / truth[i]);
    }
    return acc / static_cast<double>(pred.size());
}

double rmse(const std::vector<double>& pred, const std::vector<double>& truth) {
    if (pred.size() != truth.size()) throw AlignmentError("rmse: length mismatch");
    if (pred.empty()) throw EmptyInput("rmse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

EvalReport aggregate_report(const std::vector<DayMetrics>& days) {
    EvalReport report;
    report.per_day = days;
    auto add = [](GroupMetrics& g, const DayMetrics& d) {
        g.count += 1;
        g.mape += d.mape;
        g.rmse += d.rmse;
    };
    for (const auto& d : days) {
        add(report.overall, d);
        add(report.by_month[d.date.month], d);
        add(report.by_day_type[classify_day(d.date).day_type], d);
    }
    auto finish = [](GroupMetrics& g) {
        if (g.count > 0) {
            g.mape /= g.count;
            g.rmse /= g.count;
        }
    };
    finish(report.overall);
    for (auto& [k, g] : report.by_month) finish(g);
    for (auto& [k, g] : report.by_day_type) finish(g);
    return report;
}

} // namespace loadfc
