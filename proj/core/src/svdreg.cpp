#include "loadfc/svdreg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace loadfc {

void DimSelectConfig::validate() const {
    if (d < 2) throw Error("DimSelectConfig: d must be >= 2");
    if (c_star && *c_star <= 0.0) throw Error("DimSelectConfig: c_star must be positive");
    if (tau_grid_size < 2) throw Error("DimSelectConfig: tau_grid_size must be >= 2");
    if (tau <= 0.0) throw Error("DimSelectConfig: tau must be positive");
}

CrossCovModel estimate_cross_cov(const CurveSample& sample, int d) {
    sample.validate();
    const int n = sample.size();
    const Eigen::Index m1 = sample.responses[0].size();
    const Eigen::Index m2 = sample.regressors[0].size();
    if (d > std::min<Eigen::Index>({m1, m2, n}))
        throw DimensionTooLarge("estimate_cross_cov: d exceeds min(|G1|, |G2|, n)");
    if (d < 1) throw Error("estimate_cross_cov: d must be >= 1");

    CrossCovModel model;
    model.n = n;
    model.mean_y = mean_curve(sample.responses);
    model.mean_x = mean_curve(sample.regressors);

    Eigen::MatrixXd yc(n, m1), xc(n, m2);
    for (int i = 0; i < n; ++i) {
        yc.row(i) = (sample.responses[i].values() - model.mean_y.values()).transpose();
        xc.row(i) = (sample.regressors[i].values() - model.mean_x.values()).transpose();
    }
    // Sigma_hat on the grid, m1 x m2.
    Eigen::MatrixXd sigma = yc.transpose() * xc / static_cast<double>(n);

    const Eigen::VectorXd w1 = sample.responses[0].grid().weights();
    const Eigen::VectorXd w2 = sample.regressors[0].grid().weights();
    const Eigen::VectorXd w1s = w1.array().sqrt();
    const Eigen::VectorXd w2s = w2.array().sqrt();

    Eigen::MatrixXd b = w1s.asDiagonal() * sigma * w2s.asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

    model.lambdas.resize(d);
    model.phis.reserve(d);
    model.psis.reserve(d);
    for (int j = 0; j < d; ++j) {
        const double s = svd.singularValues()(j);
        model.lambdas(j) = std::max(0.0, s * s);
        Eigen::VectorXd phi = svd.matrixU().col(j).array() / w1s.array();
        Eigen::VectorXd psi = svd.matrixV().col(j).array() / w2s.array();
        // Deterministic sign: largest-magnitude coordinate of phi_j positive.
        Eigen::Index imax;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi(imax) < 0.0) {
            phi = -phi;
            psi = -psi;
        }
        model.phis.emplace_back(sample.responses[0].grid_ptr(), std::move(phi));
        model.psis.emplace_back(sample.regressors[0].grid_ptr(), std::move(psi));
    }
    return model;
}

Eigen::VectorXd scores(const Curve& curve, const std::vector<Curve>& basis, const Curve& mean) {
    const Curve centered = curve - mean;
    Eigen::VectorXd out(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j)
        out(static_cast<Eigen::Index>(j)) = inner_product(centered, basis[j]);
    return out;
}

int select_dim_ratio(const Eigen::VectorXd& lambdas, int d) {
    if (lambdas.size() <= d) throw Error("select_dim_ratio: need lambdas length > d");
    if (d < 1) throw Error("select_dim_ratio: d must be >= 1");
    const double lam1 = lambdas(0);
    if (!(lam1 > 0.0)) throw AllZeroSpectrum("select_dim_ratio: lambda_1 <= 0");
    // Trailing eigenvalues are numerically tiny; candidates where numerator
    // and denominator both sit below the floor are 0/0 noise and excluded.
    const double floor = 1e-12 * lam1;
    int best = 1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= d; ++j) {
        if (lambdas(j) < floor && lambdas(j - 1) < floor) continue;
        const double ratio = lambdas(j) / std::max(lambdas(j - 1), floor);
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = j;
        }
    }
    return best;
}

namespace {

enum class IcVariant { one, two };

// Tail term T(q) of the criterion; the penalty tau*q*g(n) is added by callers.
double ic_tail(const Eigen::VectorXd& lambdas, int d, int q, IcVariant variant, double c_star) {
    double tail = 0.0;
    for (int k = q + 1; k <= d; ++k) tail += lambdas(k - 1);
    tail /= static_cast<double>(d) * static_cast<double>(d);
    if (variant == IcVariant::one) return tail;
    return std::log(c_star + tail);
}

int ic_argmin(const Eigen::VectorXd& lambdas, int d, IcVariant variant, double c_star, double tau,
              double gn) {
    int best_q = 0;
    double best = ic_tail(lambdas, d, 0, variant, c_star);
    for (int q = 1; q < d; ++q) {
        const double value = ic_tail(lambdas, d, q, variant, c_star) + tau * q * gn;
        if (value < best) {
            best = value;
            best_q = q;
        }
    }
    return best_q;
}

double default_c_star(const Eigen::VectorXd& lambdas, int d) {
    return 1e-3 * std::max(lambdas(0), std::numeric_limits<double>::min()) /
           (static_cast<double>(d) * static_cast<double>(d));
}

} // namespace

int select_dim_ic(const Eigen::VectorXd& lambdas, int n, const DimSelectConfig& cfg, double tau) {
    cfg.validate();
    if (n < 2) throw Error("select_dim_ic: n must be >= 2");
    if (tau <= 0.0) throw Error("select_dim_ic: tau must be positive");
    const int d = std::min<int>(cfg.d, static_cast<int>(lambdas.size()));
    const double gn = std::pow(static_cast<double>(n), cfg.g_exponent);
    const IcVariant variant =
        (cfg.method == DimSelectMethod::ic1) ? IcVariant::one : IcVariant::two;
    const double c = cfg.c_star ? *cfg.c_star : default_c_star(lambdas, d);
    return ic_argmin(lambdas, d, variant, c, tau, gn);
}

std::pair<int, DimSelectDiagnostics>
select_dim_majority(const Eigen::VectorXd& lambdas, int n, const DimSelectConfig& cfg) {
    cfg.validate();
    const int d = std::min<int>(cfg.d, static_cast<int>(lambdas.size()));
    if (!(lambdas(0) > 0.0)) throw AllZeroSpectrum("select_dim_majority: lambda_1 <= 0");
    const double gn = std::pow(static_cast<double>(n), cfg.g_exponent);
    const double c = cfg.c_star ? *cfg.c_star : default_c_star(lambdas, d);

    DimSelectDiagnostics diag;
    auto h = [&](double tau) { return ic_argmin(lambdas, d, IcVariant::two, c, tau, gn); };

    // Plateau top: the argmin for vanishing penalty. Equal trailing tail sums
    // (exact-zero eigenvalues) resolve to the smallest q, so this is the
    // largest q the criterion can ever select.
    const double tau_tiny = 1e-300;
    const int q_top = h(tau_tiny);

    auto fall_back_to_ratio = [&]() {
        diag.ratio_fallback = true;
        const int scan = std::min<int>(d, static_cast<int>(lambdas.size()) - 1);
        diag.selected = select_dim_ratio(lambdas, scan);
        return std::make_pair(diag.selected, diag);
    };
    if (q_top == 0) return fall_back_to_ratio();

    // tau^*: smallest tau with h(tau) = 0. Bracket by doubling, then bisect.
    double hi = 1.0;
    int guard = 0;
    while (h(hi) != 0 && guard++ < 2000) hi *= 2.0;
    if (h(hi) != 0) return fall_back_to_ratio();
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo + hi) / 2.0;
        if (mid <= lo || mid >= hi) break;
        if (h(mid) == 0) hi = mid;
        else lo = mid;
    }
    const double tau_upper = hi;

    // tau_*: largest tau with h(tau) = q_top.
    double plo = tau_tiny, phi_ = tau_upper;
    if (h(phi_) == q_top) {
        plo = phi_;
    } else {
        for (int it = 0; it < 200; ++it) {
            const double mid = (plo + phi_) / 2.0;
            if (mid <= plo || mid >= phi_) break;
            if (h(mid) == q_top) plo = mid;
            else phi_ = mid;
        }
    }
    const double tau_lower = plo;
    if (!(tau_upper > tau_lower)) return fall_back_to_ratio();

    diag.tau_lower = tau_lower;
    diag.tau_upper = tau_upper;
    diag.votes.assign(static_cast<std::size_t>(d), 0);
    diag.tau_trace.reserve(static_cast<std::size_t>(cfg.tau_grid_size));
    const int g = cfg.tau_grid_size;
    for (int i = 0; i < g; ++i) {
        const double tau = tau_lower + (tau_upper - tau_lower) * i / static_cast<double>(g - 1);
        const int q = h(tau);
        diag.tau_trace.emplace_back(tau, q);
        diag.votes[static_cast<std::size_t>(q)] += 1;
    }
    int best_q = 0, best_votes = -1;
    for (int q = 0; q < d; ++q) {
        if (diag.votes[static_cast<std::size_t>(q)] > best_votes) {
            best_votes = diag.votes[static_cast<std::size_t>(q)];
            best_q = q;
        }
    }
    diag.selected = best_q;
    return {best_q, diag};
}

CurveRegressionModel fit_curve_regression(const CurveSample& sample, const DimSelectConfig& cfg,
                                          int K) {
    cfg.validate();
    sample.validate();
    const int n = sample.size();
    const int m1 = static_cast<int>(sample.responses[0].size());
    const int m2 = static_cast<int>(sample.regressors[0].size());
    const int d = std::min({cfg.d, n - 1, m1, m2});
    if (d < 2) throw InsufficientData("fit_curve_regression: effective d < 2");
    if (K > d) throw Error("fit_curve_regression: K must be <= d");
    if (n <= K) throw InsufficientData("fit_curve_regression: need n > K");

    CurveRegressionModel model;
    model.cross_cov = estimate_cross_cov(sample, d);
    model.n_regressor_terms = K;

    int selected = 0;
    switch (cfg.method) {
        case DimSelectMethod::ratio:
            selected = select_dim_ratio(model.cross_cov.lambdas, d - 1);
            break;
        case DimSelectMethod::ic1:
        case DimSelectMethod::ic2:
            selected = select_dim_ic(model.cross_cov.lambdas, n, cfg, cfg.tau);
            break;
        case DimSelectMethod::ic_majority: {
            auto [q, diag] = select_dim_majority(model.cross_cov.lambdas, n, cfg);
            selected = q;
            model.diagnostics.dim = std::move(diag);
            break;
        }
    }
    if (selected < 1) {
        selected = 1;
        model.diagnostics.r_clamped = true;
    }
    model.r_hat = std::min(selected, d);

    // Score matrices: xi (n x r_hat) on the phi basis, eta (n x K) on psi.
    Eigen::MatrixXd xi(n, model.r_hat), eta(n, K);
    std::vector<Curve> phi_r(model.cross_cov.phis.begin(),
                             model.cross_cov.phis.begin() + model.r_hat);
    std::vector<Curve> psi_k(model.cross_cov.psis.begin(), model.cross_cov.psis.begin() + K);
    for (int i = 0; i < n; ++i) {
        xi.row(i) = scores(sample.responses[i], phi_r, model.cross_cov.mean_y).transpose();
        eta.row(i) = scores(sample.regressors[i], psi_k, model.cross_cov.mean_x).transpose();
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(eta);
    Eigen::MatrixXd beta_t; // K x r_hat
    if (qr.rank() < K) {
        model.diagnostics.rank_deficient = true;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(eta, Eigen::ComputeThinU | Eigen::ComputeThinV);
        beta_t = svd.solve(xi);
    } else {
        beta_t = qr.solve(xi);
    }
    model.betas = beta_t.transpose();

    model.residual_variances.resize(model.r_hat);
    const Eigen::MatrixXd resid = xi - eta * beta_t;
    const double dof = std::max(1, n - K);
    for (int j = 0; j < model.r_hat; ++j)
        model.residual_variances(j) = resid.col(j).squaredNorm() / dof;
    return model;
}

Curve reconstruct_response(const CurveRegressionModel& model, const Eigen::VectorXd& xi) {
    Eigen::VectorXd v = model.cross_cov.mean_y.values();
    for (Eigen::Index j = 0; j < xi.size(); ++j)
        v += xi(j) * model.cross_cov.phis[static_cast<std::size_t>(j)].values();
    return Curve(model.cross_cov.mean_y.grid_ptr(), std::move(v));
}

Curve predict_response_curve(const CurveRegressionModel& model, const Curve& x) {
    std::vector<Curve> psi_k(model.cross_cov.psis.begin(),
                             model.cross_cov.psis.begin() + model.n_regressor_terms);
    const Eigen::VectorXd eta = scores(x, psi_k, model.cross_cov.mean_x);
    const Eigen::VectorXd xi = model.betas * eta;
    return reconstruct_response(model, xi);
}

Eigen::VectorXd oracle_scores(const Curve& y_true, const CurveRegressionModel& model) {
    std::vector<Curve> phi_r(model.cross_cov.phis.begin(),
                             model.cross_cov.phis.begin() + model.r_hat);
    return scores(y_true, phi_r, model.cross_cov.mean_y);
}

} // namespace loadfc
