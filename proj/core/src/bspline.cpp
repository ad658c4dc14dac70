#include "loadfc/bspline.hpp"
#include "loadfc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace loadfc {

BSplineBasis::BSplineBasis(Eigen::VectorXd knots, int order)
    : knots_(std::move(knots)), order_(order) {
    if (order_ < 2) throw Error("BSplineBasis: order must be >= 2");
    if (knots_.size() < 2 * order_) throw Error("BSplineBasis: too few knots");
    for (Eigen::Index i = 1; i < knots_.size(); ++i)
        if (knots_(i) < knots_(i - 1)) throw Error("BSplineBasis: knots must be nondecreasing");
}

BSplineBasis BSplineBasis::uniform(double a, double b, int basis_dim, int order) {
    if (!(b > a)) throw Error("BSplineBasis::uniform: empty domain");
    order = std::min(order, basis_dim);
    if (order < 2) throw Error("BSplineBasis::uniform: basis_dim too small");
    const int spans = basis_dim - order + 1; // interior spans covering [a, b]
    const double h = (b - a) / spans;
    const int n_knots = basis_dim + order;
    Eigen::VectorXd knots(n_knots);
    for (int i = 0; i < n_knots; ++i) knots(i) = a + (i - (order - 1)) * h;
    return BSplineBasis(std::move(knots), order);
}

BSplineBasis BSplineBasis::from_anchors(const Eigen::VectorXd& anchors, int order) {
    const int m = static_cast<int>(anchors.size());
    if (m < 2) throw Error("BSplineBasis::from_anchors: need at least 2 anchors");
    for (int i = 1; i < m; ++i)
        if (!(anchors(i) > anchors(i - 1)))
            throw Error("BSplineBasis::from_anchors: anchors must be strictly increasing");
    const double h_lo = anchors(1) - anchors(0);
    const double h_hi = anchors(m - 1) - anchors(m - 2);
    const int pad = order - 1;
    Eigen::VectorXd knots(m + 2 * pad);
    for (int i = 0; i < pad; ++i) knots(i) = anchors(0) - (pad - i) * h_lo;
    knots.segment(pad, m) = anchors;
    for (int i = 0; i < pad; ++i) knots(pad + m + i) = anchors(m - 1) + (i + 1) * h_hi;
    return BSplineBasis(std::move(knots), order);
}

int BSplineBasis::find_span(double x) const {
    const int lo = order_ - 1;
    const int hi = static_cast<int>(knots_.size()) - order_; // index of domain_max
    if (x >= knots_(hi)) return hi - 1;
    if (x <= knots_(lo)) return lo;
    // Binary search for i with knots_(i) <= x < knots_(i+1).
    int a = lo, b = hi;
    while (b - a > 1) {
        const int mid = (a + b) / 2;
        if (x < knots_(mid)) b = mid;
        else a = mid;
    }
    return a;
}

// Cox-de Boor recursion (triangular table), optional first derivative.
void BSplineBasis::eval(double x, int n_derivs, Eigen::VectorXd& values,
                        Eigen::VectorXd& derivs) const {
    const int k = order_;
    const int span = find_span(x);
    std::vector<double> left(static_cast<std::size_t>(k)), right(static_cast<std::size_t>(k));
    // ndu(r, j) = value of the r-th active basis function of degree j.
    Eigen::MatrixXd ndu = Eigen::MatrixXd::Zero(k, k);
    ndu(0, 0) = 1.0;
    for (int j = 1; j < k; ++j) {
        left[static_cast<std::size_t>(j)] = x - knots_(span + 1 - j);
        right[static_cast<std::size_t>(j)] = knots_(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double den = right[static_cast<std::size_t>(r + 1)] +
                               left[static_cast<std::size_t>(j - r)];
            const double temp = den != 0.0 ? ndu(r, j - 1) / den : 0.0;
            ndu(r, j) = saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        ndu(j, j) = saved;
    }
    values = Eigen::VectorXd::Zero(size());
    const int first = span - k + 1;
    for (int j = 0; j < k; ++j) values(first + j) = ndu(j, k - 1);

    if (n_derivs < 1) return;
    // N'_{m,k} = (k-1) [ N_{m,k-1}/(t_{m+k-1}-t_m) - N_{m+1,k-1}/(t_{m+k}-t_{m+1}) ],
    // with the degree-(k-2) values sitting in column k-2 of the table.
    derivs = Eigen::VectorXd::Zero(size());
    for (int j = 0; j < k; ++j) {
        const int m = first + j;
        double a = 0.0, b = 0.0;
        const double den1 = knots_(m + k - 1) - knots_(m);
        const double den2 = knots_(m + k) - knots_(m + 1);
        if (j >= 1 && den1 != 0.0) a = ndu(j - 1, k - 2) / den1;
        if (j <= k - 2 && den2 != 0.0) b = ndu(j, k - 2) / den2;
        derivs(m) = (k - 1) * (a - b);
    }
}

Eigen::VectorXd BSplineBasis::row(double x) const {
    Eigen::VectorXd values, derivs;
    eval(x, 0, values, derivs);
    return values;
}

Eigen::VectorXd BSplineBasis::derivative_row(double x) const {
    Eigen::VectorXd values, derivs;
    eval(x, 1, values, derivs);
    return derivs;
}

Eigen::VectorXd BSplineBasis::row_extended(double x) const {
    const double a = domain_min(), b = domain_max();
    if (x < a) {
        Eigen::VectorXd values, derivs;
        eval(a, 1, values, derivs);
        return values + (x - a) * derivs;
    }
    if (x > b) {
        Eigen::VectorXd values, derivs;
        eval(b, 1, values, derivs);
        return values + (x - b) * derivs;
    }
    return row(x);
}

Eigen::VectorXd BSplineBasis::greville() const {
    const int n = size();
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 1; j < order_; ++j) s += knots_(i + j);
        g(i) = s / (order_ - 1);
    }
    return g;
}

Eigen::MatrixXd BSplineBasis::second_difference_penalty() const {
    const int n = size();
    const Eigen::VectorXd g = greville();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max(0, n - 2), n);
    for (int i = 1; i + 1 < n; ++i) {
        const double h0 = g(i) - g(i - 1);
        const double h1 = g(i + 1) - g(i);
        d(i - 1, i - 1) = 1.0 / h0;
        d(i - 1, i) = -(1.0 / h0 + 1.0 / h1);
        d(i - 1, i + 1) = 1.0 / h1;
    }
    return d.transpose() * d;
}

} // namespace loadfc
