#pragma once

#include <Eigen/Core>

namespace loadfc {

/// B-spline basis on an unclamped knot vector. The knots extend order-1
/// spans past each end of the working domain, so partition of unity and
/// Marsden's identity hold on the whole domain; the second-difference
/// penalty built on the Greville abscissae then annihilates exactly the
/// affine functions.
class BSplineBasis {
public:
    BSplineBasis() = default;
    /// knots: full nondecreasing knot vector, size = basis count + order.
    BSplineBasis(Eigen::VectorXd knots, int order);

    /// Equally spaced knots covering [a, b] with the given number of basis
    /// functions (order 4 = cubic by default, lowered if dim is smaller).
    static BSplineBasis uniform(double a, double b, int basis_dim, int order = 4);

    /// Knots at the given strictly increasing anchors (first and last anchor
    /// delimit the working domain), extended beyond the ends by repeating the
    /// boundary spacing. Basis count = anchors + order - 2.
    static BSplineBasis from_anchors(const Eigen::VectorXd& anchors, int order = 4);

    int size() const { return static_cast<int>(knots_.size()) - order_; }
    int order() const { return order_; }
    const Eigen::VectorXd& knots() const { return knots_; }
    double domain_min() const { return knots_(order_ - 1); }
    double domain_max() const { return knots_(knots_.size() - order_); }

    /// Dense row of basis values at x (x inside the domain; callers clamp or
    /// extend outside).
    Eigen::VectorXd row(double x) const;
    /// First-derivative row at x.
    Eigen::VectorXd derivative_row(double x) const;
    /// Basis row with linear extension outside the domain.
    Eigen::VectorXd row_extended(double x) const;

    /// Greville abscissae (averages of order-1 consecutive interior knots).
    Eigen::VectorXd greville() const;

    /// D^T D with D the divided second-difference operator on the Greville
    /// sites; null space = affine coefficient sequences for any knots.
    Eigen::MatrixXd second_difference_penalty() const;

private:
    void eval(double x, int n_derivs, Eigen::VectorXd& values, Eigen::VectorXd& derivs) const;
    int find_span(double x) const;

    Eigen::VectorXd knots_;
    int order_ = 4;
};

} // namespace loadfc
