#pragma once

#include "loadfc/errors.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace loadfc {

/// Discretization of a compact interval: strictly increasing abscissae plus
/// positive quadrature weights. Immutable after construction; shared by all
/// curves sampled on it.
class Grid {
public:
    /// Trapezoidal weights: half-interval at the endpoints, mean of the two
    /// adjacent spacings at interior points.
    explicit Grid(Eigen::VectorXd points);
    Grid(Eigen::VectorXd points, Eigen::VectorXd weights);

    static std::shared_ptr<const Grid> uniform(double a, double b, int n);
    static std::shared_ptr<const Grid> make(Eigen::VectorXd points);
    static std::shared_ptr<const Grid> make(Eigen::VectorXd points, Eigen::VectorXd weights);

    /// Concatenation of two grids. The second grid's points are shifted past
    /// the first so the result is strictly increasing; each segment keeps its
    /// own quadrature weights, so integrals add segment-wise.
    static std::shared_ptr<const Grid> concat(const Grid& a, const Grid& b);

    const Eigen::VectorXd& points() const { return points_; }
    const Eigen::VectorXd& weights() const { return weights_; }
    Eigen::Index size() const { return points_.size(); }

    bool same_as(const Grid& other) const;

private:
    Eigen::VectorXd points_;
    Eigen::VectorXd weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// A real-valued function sampled on a fixed grid.
class Curve {
public:
    Curve() = default;
    Curve(GridPtr grid, Eigen::VectorXd values);

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }

    Curve operator+(const Curve& other) const;
    Curve operator-(const Curve& other) const;
    Curve scaled(double c) const;

private:
    GridPtr grid_;
    Eigen::VectorXd values_;
};

/// Quadrature approximation of the L2 inner product \int f g.
double inner_product(const Curve& f, const Curve& g);
double l2_norm(const Curve& f);

/// Paired sample of regressor curves (grid G2) and response curves (grid G1).
struct CurveSample {
    std::vector<Curve> regressors;
    std::vector<Curve> responses;

    int size() const { return static_cast<int>(responses.size()); }
    void validate() const;
};

/// Pointwise arithmetic mean; throws EmptyInput on an empty list.
Curve mean_curve(const std::vector<Curve>& curves);

/// Location/scale of a curve segment, pooled over grid points and curves.
struct SegmentStats {
    double mean = 0.0;
    double sd = 1.0;
};

struct JoinStats {
    SegmentStats load;
    SegmentStats temp;
};

/// Pooled mean/sd per segment over a training set of (load, temperature)
/// curve pairs. Throws DegenerateScale when a segment has zero variance.
JoinStats compute_join_stats(const std::vector<Curve>& loads, const std::vector<Curve>& temps);

/// Standardizes the two segments with the given (training) statistics and
/// concatenates them into one curve on the joined grid.
Curve standardize_and_join(const Curve& load, const Curve& temp, const JoinStats& stats);

namespace detail {
void require_same_grid(const Curve& a, const Curve& b, const char* where);
}

} // namespace loadfc
