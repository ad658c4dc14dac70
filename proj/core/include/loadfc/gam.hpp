#pragma once

#include "loadfc/bspline.hpp"
#include "loadfc/calendar.hpp"
#include "loadfc/errors.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace loadfc {

/// One week of aggregated covariates for the trend model.
struct WeeklyRecord {
    Date week_start;       // Monday
    int t = 0;             // weeks since series start
    double load = 0.0;     // L_t, weekly average load (MW)
    double load_prev = 0.0; // L_{t-1}
    int offset = 0;        // O_t in {-3..7}
    double temp = 0.0;     // T_t, weekly average temperature (C)
    double temp_prev = 0.0; // T_{t-1}
    double cloud = 0.0;    // C_t in [0,1]
    int week_of_year = 1;  // I_t in 1..53

    void validate() const;
};

enum class Covariate { week_t, offset, load_prev, temp, temp_prev, cloud, week_index };

std::string to_string(Covariate c);
Covariate covariate_from_string(const std::string& s);

/// Covariate value used for basis evaluation. Week 53 shares the boundary
/// basis support with week 52 (the index is capped at 52).
double covariate_value(const WeeklyRecord& r, Covariate c);

enum class TermKind { univariate, tensor };
enum class KnotRule { uniform, september };

struct TermSpec {
    TermKind kind = TermKind::univariate;
    Covariate cov1 = Covariate::week_t;
    Covariate cov2 = Covariate::week_index; // tensor only
    int basis_dim1 = 10;
    int basis_dim2 = 6; // tensor only
    KnotRule knot_rule = KnotRule::uniform; // september applies to cov1 = week_t
};

/// Built-in term sets. "trend1": univariate smooths of t, O, L_prev, T,
/// T_prev, C. "trend2": same t and O terms, the remaining four as tensor
/// products with the week-of-year index.
std::vector<TermSpec> preset_terms(const std::string& name);

/// A smooth term after basis construction and fitting.
struct SmoothTerm {
    TermSpec spec;
    BSplineBasis basis1;
    BSplineBasis basis2;           // tensor only
    Eigen::VectorXd constraint;    // training column sums of the raw block
    Eigen::MatrixXd penalty;       // constrained-space penalty, trace-normalized
    double penalty_scale = 1.0;
    double lambda_smooth = 1.0;
    Eigen::VectorXd coefs;         // constrained space, raw_dim - 1 entries

    int raw_dim() const;
};

struct GamMetrics {
    double mape = 0.0;
    double rmse = 0.0;
};

struct GamModel {
    double intercept = 0.0;
    std::vector<SmoothTerm> terms;
    double gcv = 0.0;
    double edf = 0.0;
    double pct_explained = 0.0; // 1 - RSS/TSS
    GamMetrics fitted_in_sample;
    bool ridged = false;
};

/// Design and block penalty for a term set over the training records:
/// per-term constrained design blocks (no intercept column) and matching
/// penalty blocks.
struct GamDesign {
    std::vector<SmoothTerm> terms;  // bases, constraints and penalties filled
    Eigen::MatrixXd design;         // n x sum(raw_dim_j - 1)
    std::vector<int> col_offset;
    std::vector<int> col_width;
};

GamDesign build_design(const std::vector<WeeklyRecord>& records,
                       const std::vector<TermSpec>& specs);

struct GamFitOptions {
    int grid_points = 30;
    double log10_lambda_min = -7.0;
    double log10_lambda_max = 7.0;
    int sweeps = 2;
    /// When set, skips the GCV search and fits all terms at this smoothing
    /// parameter.
    std::optional<double> fixed_lambda;
};

/// Penalized least squares with GCV-calibrated smoothing: for each candidate
/// smoothing vector on a log grid (coordinate descent over terms), solves
/// (X'X + sum_j lambda_j S_j) beta = X'y and scores
/// GCV = n RSS / (n - tr(H))^2, keeping the minimizer.
GamModel fit_gam(const std::vector<WeeklyRecord>& records, const std::vector<TermSpec>& specs,
                 const GamFitOptions& options = {});

struct GamPrediction {
    double value = 0.0;
    bool extrapolated = false; // some covariate outside the training range
};

double predict_gam(const GamModel& model, const WeeklyRecord& record);
GamPrediction predict_gam_ex(const GamModel& model, const WeeklyRecord& record);

/// Contribution of one fitted smooth to the prediction (centered over the
/// training sample by construction).
double term_value(const GamModel& model, std::size_t term_index, const WeeklyRecord& record);

struct ModelComparison {
    struct Side {
        double gcv = 0.0;
        double pct_explained = 0.0;
        GamMetrics in_sample;
        GamMetrics holdout;
    };
    Side first;
    Side second;
    int gcv_winner = 0; // 0 first, 1 second
};

/// Fits both term sets on the chronological head of the records and scores
/// the tail as a holdout; reports GCV, explained share and MAPE/RMSE.
ModelComparison compare_models(const std::vector<WeeklyRecord>& records,
                               const std::vector<TermSpec>& spec1,
                               const std::vector<TermSpec>& spec2,
                               double holdout_fraction = 0.2);

std::string format_comparison(const ModelComparison& c);

} // namespace loadfc
