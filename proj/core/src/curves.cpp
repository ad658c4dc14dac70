#include "loadfc/curves.hpp"

#include <cmath>

namespace loadfc {

namespace {

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& p) {
    const Eigen::Index n = p.size();
    Eigen::VectorXd w(n);
    w(0) = (p(1) - p(0)) / 2.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) w(i) = (p(i + 1) - p(i - 1)) / 2.0;
    w(n - 1) = (p(n - 1) - p(n - 2)) / 2.0;
    return w;
}

void validate_grid(const Eigen::VectorXd& p, const Eigen::VectorXd& w) {
    if (p.size() < 2) throw Error("Grid: need at least 2 points");
    if (w.size() != p.size()) throw Error("Grid: weights length must match points");
    for (Eigen::Index i = 1; i < p.size(); ++i)
        if (!(p(i) > p(i - 1))) throw Error("Grid: points must be strictly increasing");
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (!(w(i) > 0.0)) throw Error("Grid: weights must be positive");
}

} // namespace

Grid::Grid(Eigen::VectorXd points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Error("Grid: need at least 2 points");
    weights_ = trapezoid_weights(points_);
    validate_grid(points_, weights_);
}

Grid::Grid(Eigen::VectorXd points, Eigen::VectorXd weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    validate_grid(points_, weights_);
}

std::shared_ptr<const Grid> Grid::uniform(double a, double b, int n) {
    Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(n, a, b);
    return std::make_shared<const Grid>(std::move(p));
}

std::shared_ptr<const Grid> Grid::make(Eigen::VectorXd points) {
    return std::make_shared<const Grid>(std::move(points));
}

std::shared_ptr<const Grid> Grid::make(Eigen::VectorXd points, Eigen::VectorXd weights) {
    return std::make_shared<const Grid>(std::move(points), std::move(weights));
}

std::shared_ptr<const Grid> Grid::concat(const Grid& a, const Grid& b) {
    const Eigen::Index na = a.size(), nb = b.size();
    // Gap of one mean spacing of `a` keeps points strictly increasing; only
    // the stored weights matter for integration.
    const double gap = (a.points_(na - 1) - a.points_(0)) / static_cast<double>(na - 1);
    const double shift = a.points_(na - 1) + gap - b.points_(0);
    Eigen::VectorXd p(na + nb), w(na + nb);
    p.head(na) = a.points_;
    p.tail(nb) = b.points_.array() + shift;
    w.head(na) = a.weights_;
    w.tail(nb) = b.weights_;
    return std::make_shared<const Grid>(std::move(p), std::move(w));
}

bool Grid::same_as(const Grid& other) const {
    if (this == &other) return true;
    return points_.size() == other.points_.size() && points_ == other.points_ &&
           weights_ == other.weights_;
}

Curve::Curve(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw Error("Curve: null grid");
    if (values_.size() != grid_->size()) throw Error("Curve: values length must match grid");
    if (!values_.allFinite()) throw Error("Curve: values must be finite");
}

Curve Curve::operator+(const Curve& other) const {
    detail::require_same_grid(*this, other, "Curve::operator+");
    return Curve(grid_, values_ + other.values_);
}

Curve Curve::operator-(const Curve& other) const {
    detail::require_same_grid(*this, other, "Curve::operator-");
    return Curve(grid_, values_ - other.values_);
}

Curve Curve::scaled(double c) const { return Curve(grid_, values_ * c); }

namespace detail {
void require_same_grid(const Curve& a, const Curve& b, const char* where) {
    if (!a.grid().same_as(b.grid()))
        throw GridMismatch(std::string(where) + ": curves live on different grids");
}
} // namespace detail

double inner_product(const Curve& f, const Curve& g) {
    detail::require_same_grid(f, g, "inner_product");
    return (f.grid().weights().array() * f.values().array() * g.values().array()).sum();
}

double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

void CurveSample::validate() const {
    if (responses.size() != regressors.size())
        throw Error("CurveSample: regressors and responses must have equal length");
    if (responses.size() < 2) throw InsufficientData("CurveSample: need n >= 2");
    for (std::size_t i = 1; i < responses.size(); ++i) {
        detail::require_same_grid(responses[0], responses[i], "CurveSample responses");
        detail::require_same_grid(regressors[0], regressors[i], "CurveSample regressors");
    }
}

Curve mean_curve(const std::vector<Curve>& curves) {
    if (curves.empty()) throw EmptyInput("mean_curve: empty curve list");
    Eigen::VectorXd acc = curves[0].values();
    for (std::size_t i = 1; i < curves.size(); ++i) {
        detail::require_same_grid(curves[0], curves[i], "mean_curve");
        acc += curves[i].values();
    }
    acc /= static_cast<double>(curves.size());
    return Curve(curves[0].grid_ptr(), std::move(acc));
}

namespace {

SegmentStats pooled_stats(const std::vector<Curve>& curves, const char* what) {
    if (curves.empty()) throw EmptyInput("compute_join_stats: empty curve list");
    double sum = 0.0, sumsq = 0.0;
    std::int64_t count = 0;
    for (const auto& c : curves) {
        sum += c.values().sum();
        sumsq += c.values().squaredNorm();
        count += c.size();
    }
    const double mean = sum / static_cast<double>(count);
    const double var = sumsq / static_cast<double>(count) - mean * mean;
    const double sd = std::sqrt(std::max(0.0, var));
    if (sd < 1e-12 * std::max(1.0, std::abs(mean)))
        throw DegenerateScale(std::string("compute_join_stats: zero variance in ") + what +
                              " segment");
    return SegmentStats{mean, sd};
}

} // namespace

JoinStats compute_join_stats(const std::vector<Curve>& loads, const std::vector<Curve>& temps) {
    return JoinStats{pooled_stats(loads, "load"), pooled_stats(temps, "temperature")};
}

Curve standardize_and_join(const Curve& load, const Curve& temp, const JoinStats& stats) {
    if (stats.load.sd <= 0.0 || stats.temp.sd <= 0.0)
        throw DegenerateScale("standardize_and_join: non-positive scale");
    GridPtr joined = Grid::concat(load.grid(), temp.grid());
    Eigen::VectorXd v(load.size() + temp.size());
    v.head(load.size()) = (load.values().array() - stats.load.mean) / stats.load.sd;
    v.tail(temp.size()) = (temp.values().array() - stats.temp.mean) / stats.temp.sd;
    return Curve(std::move(joined), std::move(v));
}

} // namespace loadfc
