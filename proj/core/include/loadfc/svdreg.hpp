#pragma once

#include "loadfc/curves.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace loadfc {

/// Discretized singular value decomposition of the sample cross-covariance
/// operator between the response and regressor curve families: singular
/// triples (lambda_j, phi_j, psi_j) with the phi_j / psi_j orthonormal under
/// the quadrature inner products of their grids, plus the sample means.
struct CrossCovModel {
    Curve mean_x; // on the regressor grid G2
    Curve mean_y; // on the response grid G1
    Eigen::VectorXd lambdas; // nonincreasing, >= 0 (squared singular values)
    std::vector<Curve> phis; // response-side basis, on G1
    std::vector<Curve> psis; // regressor-side basis, on G2
    int n = 0;

    int dim() const { return static_cast<int>(lambdas.size()); }
};

/// Estimates Sigma_hat(u,v) = n^-1 sum_i (Y_i - Ybar)(u) (X_i - Xbar)(v) on
/// the grids and computes its quadrature-weighted SVD: with diagonal weight
/// matrices W1, W2, the SVD of W1^1/2 Sigma_hat W2^1/2 yields singular values
/// s_j and weight-transformed singular vectors; lambda_j = s_j^2,
/// phi_j = W1^-1/2 u_j, psi_j = W2^-1/2 v_j. Signs are fixed so each phi_j's
/// largest-magnitude coordinate is positive (the paired psi_j flips with it).
CrossCovModel estimate_cross_cov(const CurveSample& sample, int d);

/// Projection scores <curve - mean, basis_j> for each basis element.
Eigen::VectorXd scores(const Curve& curve, const std::vector<Curve>& basis, const Curve& mean);

enum class DimSelectMethod { ratio, ic1, ic2, ic_majority };

struct DimSelectConfig {
    DimSelectMethod method = DimSelectMethod::ic_majority;
    /// Maximum dimension scanned; the effective value is capped at
    /// min(d, n-1, |G1|, |G2|) when fitting.
    int d = 20;
    /// Constant inside IC2's logarithm; when unset, 1e-3 * lambda_1 / d^2.
    std::optional<double> c_star;
    int tau_grid_size = 100;
    /// Penalty g(n) = n^g_exponent.
    double g_exponent = -0.5;
    /// Penalty constant used when method is ic1/ic2 directly (the majority
    /// scheme scans tau instead of fixing it).
    double tau = 1.0;

    void validate() const;
};

/// Ratio-based estimator: argmin over 1 <= j <= d of lambda_{j+1}/lambda_j.
/// Requires lambdas.size() > d. Denominators below 1e-12 * lambda_1 are
/// clamped to that floor; ties break toward the smallest index.
int select_dim_ratio(const Eigen::VectorXd& lambdas, int d);

/// Information-criterion estimator, argmin over 0 <= q < d of
///   IC1(q) = d^-2 sum_{k=q+1}^d lambda_k + tau q g(n)
///   IC2(q) = log(c_star + d^-2 sum_{k=q+1}^d lambda_k) + tau q g(n)
/// with the variant taken from cfg.method (ic1 or ic2).
int select_dim_ic(const Eigen::VectorXd& lambdas, int n, const DimSelectConfig& cfg, double tau);

struct DimSelectDiagnostics {
    /// (tau, argmin q) pairs over the voting grid.
    std::vector<std::pair<double, int>> tau_trace;
    double tau_lower = 0.0;
    double tau_upper = 0.0;
    /// Votes per candidate q over the scanned grid.
    std::vector<int> votes;
    bool ratio_fallback = false;
    int selected = 0;
};

/// Majority-voting scheme over IC2: brackets the tau interval [tau_*, tau^*]
/// on which the argmin map h(tau) descends from its maximal plateau to 0
/// (h is non-increasing in tau; the boundaries are located by bisection),
/// evaluates h on an equispaced tau grid and returns the q selected over the
/// longest sub-interval (maximum vote count, ties toward smaller q).
std::pair<int, DimSelectDiagnostics>
select_dim_majority(const Eigen::VectorXd& lambdas, int n, const DimSelectConfig& cfg);

struct RegressionDiagnostics {
    DimSelectDiagnostics dim;
    bool rank_deficient = false;
    bool r_clamped = false;
};

/// Curve-on-curve regression reduced to r_hat ordinary least squares fits of
/// the response scores on the first K regressor scores.
struct CurveRegressionModel {
    CrossCovModel cross_cov;
    int r_hat = 0;
    int n_regressor_terms = 0;        // K
    Eigen::MatrixXd betas;            // r_hat x K
    Eigen::VectorXd residual_variances; // length r_hat
    RegressionDiagnostics diagnostics;
};

/// Fits the reduced model: estimates the cross-covariance SVD, selects r_hat
/// per cfg, and regresses each response score xi_j (j <= r_hat) on the
/// regressor scores eta_1..eta_K without intercept (scores are centered by
/// construction). A rank-deficient score matrix falls back to the
/// minimum-norm least-squares solution, flagged in diagnostics.
CurveRegressionModel fit_curve_regression(const CurveSample& sample, const DimSelectConfig& cfg,
                                          int K);

/// Ybar + sum_{j<=r_hat} (sum_{k<=K} beta_jk eta_k) phi_j with
/// eta = scores(x, psis, Xbar).
Curve predict_response_curve(const CurveRegressionModel& model, const Curve& x);

/// Projections of the true response on the fitted response basis,
/// xi~_j = <y_true - Ybar, phi_j> for j <= r_hat.
Eigen::VectorXd oracle_scores(const Curve& y_true, const CurveRegressionModel& model);

/// Reconstruction from given response scores: Ybar + sum_j xi_j phi_j.
Curve reconstruct_response(const CurveRegressionModel& model, const Eigen::VectorXd& xi);

} // namespace loadfc
