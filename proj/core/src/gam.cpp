#include "loadfc/gam.hpp"
#include "loadfc/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

namespace loadfc {

void WeeklyRecord::validate() const {
    if (week_of_year < 1 || week_of_year > 53)
        throw Error("WeeklyRecord: week_of_year out of [1, 53]");
    if (offset < -3 || offset > 7) throw Error("WeeklyRecord: offset out of [-3, 7]");
    if (!(load > 0.0)) throw Error("WeeklyRecord: load must be positive");
}

std::string to_string(Covariate c) {
    switch (c) {
        case Covariate::week_t: return "t";
        case Covariate::offset: return "offset";
        case Covariate::load_prev: return "load_prev";
        case Covariate::temp: return "temp";
        case Covariate::temp_prev: return "temp_prev";
        case Covariate::cloud: return "cloud";
        case Covariate::week_index: return "week_index";
    }
    return "?";
}

Covariate covariate_from_string(const std::string& s) {
    if (s == "t") return Covariate::week_t;
    if (s == "offset") return Covariate::offset;
    if (s == "load_prev") return Covariate::load_prev;
    if (s == "temp") return Covariate::temp;
    if (s == "temp_prev") return Covariate::temp_prev;
    if (s == "cloud") return Covariate::cloud;
    if (s == "week_index") return Covariate::week_index;
    throw ConfigError("unknown covariate '" + s + "'");
}

double covariate_value(const WeeklyRecord& r, Covariate c) {
    switch (c) {
        case Covariate::week_t: return static_cast<double>(r.t);
        case Covariate::offset: return static_cast<double>(r.offset);
        case Covariate::load_prev: return r.load_prev;
        case Covariate::temp: return r.temp;
        case Covariate::temp_prev: return r.temp_prev;
        case Covariate::cloud: return r.cloud;
        case Covariate::week_index: return std::min(52.0, static_cast<double>(r.week_of_year));
    }
    return 0.0;
}

std::vector<TermSpec> preset_terms(const std::string& name) {
    using C = Covariate;
    if (name == "trend1") {
        return {
            TermSpec{TermKind::univariate, C::week_t, C::week_index, 12, 0, KnotRule::september},
            TermSpec{TermKind::univariate, C::offset, C::week_index, 6, 0, KnotRule::uniform},
            TermSpec{TermKind::univariate, C::load_prev, C::week_index, 8, 0, KnotRule::uniform},
            TermSpec{TermKind::univariate, C::temp, C::week_index, 8, 0, KnotRule::uniform},
            TermSpec{TermKind::univariate, C::temp_prev, C::week_index, 8, 0, KnotRule::uniform},
            TermSpec{TermKind::univariate, C::cloud, C::week_index, 8, 0, KnotRule::uniform},
        };
    }
    if (name == "trend2") {
        return {
            TermSpec{TermKind::univariate, C::week_t, C::week_index, 12, 0, KnotRule::september},
            TermSpec{TermKind::univariate, C::offset, C::week_index, 6, 0, KnotRule::uniform},
            TermSpec{TermKind::tensor, C::load_prev, C::week_index, 6, 6, KnotRule::uniform},
            TermSpec{TermKind::tensor, C::temp, C::week_index, 6, 6, KnotRule::uniform},
            TermSpec{TermKind::tensor, C::temp_prev, C::week_index, 6, 6, KnotRule::uniform},
            TermSpec{TermKind::tensor, C::cloud, C::week_index, 6, 6, KnotRule::uniform},
        };
    }
    throw ConfigError("unknown trend preset '" + name + "' (expected trend1 or trend2)");
}

int SmoothTerm::raw_dim() const {
    return spec.kind == TermKind::univariate ? basis1.size() : basis1.size() * basis2.size();
}

namespace {

std::pair<double, double> covariate_range(const std::vector<WeeklyRecord>& records, Covariate c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        const double v = covariate_value(r, c);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

BSplineBasis make_basis(const std::vector<WeeklyRecord>& records, Covariate c, int dim,
                        KnotRule rule) {
    auto [lo, hi] = covariate_range(records, c);
    if (!(hi - lo > 1e-12 * std::max(1.0, std::abs(hi))) && dim > 1)
        throw DegenerateCovariate("build_design: covariate " + to_string(c) +
                                  " is constant over the training records");
    if (rule == KnotRule::september && c == Covariate::week_t) {
        // Anchor knots at the week containing September 1 of each year.
        std::set<double> anchors;
        for (const auto& r : records) {
            const Date ws = r.week_start;
            for (int i = 0; i < 7; ++i) {
                const Date x = add_days(ws, i);
                if (x.month == 9 && x.day == 1) anchors.insert(static_cast<double>(r.t));
            }
        }
        std::vector<double> interior;
        for (double a : anchors)
            if (a > lo + 1e-9 && a < hi - 1e-9) interior.push_back(a);
        if (!interior.empty()) {
            Eigen::VectorXd anchor_vec(static_cast<Eigen::Index>(interior.size()) + 2);
            anchor_vec(0) = lo;
            for (std::size_t i = 0; i < interior.size(); ++i)
                anchor_vec(static_cast<Eigen::Index>(i) + 1) = interior[i];
            anchor_vec(anchor_vec.size() - 1) = hi;
            return BSplineBasis::from_anchors(anchor_vec);
        }
        // Not enough history for yearly knots; fall through to uniform.
    }
    return BSplineBasis::uniform(lo, hi, dim);
}

Eigen::VectorXd raw_row(const SmoothTerm& term, const WeeklyRecord& r, bool extended,
                        bool* extrapolated = nullptr) {
    auto one = [&](const BSplineBasis& basis, Covariate c) {
        const double x = covariate_value(r, c);
        // Forecast weeks always extend the time axis; only out-of-range
        // weather/load covariates are worth flagging.
        if (extrapolated && c != Covariate::week_t &&
            (x < basis.domain_min() || x > basis.domain_max()))
            *extrapolated = true;
        return extended ? basis.row_extended(x)
                        : basis.row(std::clamp(x, basis.domain_min(), basis.domain_max()));
    };
    if (term.spec.kind == TermKind::univariate) return one(term.basis1, term.spec.cov1);
    const Eigen::VectorXd r1 = one(term.basis1, term.spec.cov1);
    const Eigen::VectorXd r2 = one(term.basis2, term.spec.cov2);
    Eigen::VectorXd out(r1.size() * r2.size());
    for (Eigen::Index i = 0; i < r1.size(); ++i)
        out.segment(i * r2.size(), r2.size()) = r1(i) * r2;
    return out;
}

/// Orthonormal basis of the null space of the 1 x B constraint row.
Eigen::MatrixXd null_space(const Eigen::VectorXd& c) {
    const Eigen::Index b = c.size();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.householderQ();
    return q.rightCols(b - 1);
}

Eigen::MatrixXd raw_penalty(const SmoothTerm& term) {
    if (term.spec.kind == TermKind::univariate) return term.basis1.second_difference_penalty();
    const Eigen::MatrixXd s1 = term.basis1.second_difference_penalty();
    const Eigen::MatrixXd s2 = term.basis2.second_difference_penalty();
    const Eigen::Index b1 = s1.rows(), b2 = s2.rows();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(b1 * b2, b1 * b2);
    // S1 (x) I + I (x) S2: marginal roughness in each direction.
    for (Eigen::Index i = 0; i < b1; ++i)
        for (Eigen::Index j = 0; j < b1; ++j)
            if (s1(i, j) != 0.0)
                s.block(i * b2, j * b2, b2, b2).diagonal().array() += s1(i, j);
    for (Eigen::Index i = 0; i < b1; ++i) s.block(i * b2, i * b2, b2, b2) += s2;
    return s;
}

struct Solved {
    Eigen::VectorXd beta;
    double rss = 0.0;
    double edf = 0.0;
    double gcv = std::numeric_limits<double>::infinity();
    bool ridged = false;
};

Solved solve_penalized(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty,
                       const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const GamDesign& design, const std::vector<double>& lambdas) {
    const double n = static_cast<double>(y.size());
    Eigen::MatrixXd a = xtx;
    for (std::size_t j = 0; j < design.terms.size(); ++j) {
        const int off = design.col_offset[j] + 1; // +1 for intercept column
        const int w = design.col_width[j];
        a.block(off, off, w, w) += lambdas[j] * design.terms[j].penalty;
    }
    Solved out;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    out.beta = ldlt.solve(xty);
    const double rel_resid = (a * out.beta - xty).norm() / std::max(1e-300, xty.norm());
    if (ldlt.info() != Eigen::Success || !out.beta.allFinite() || rel_resid > 1e-6) {
        // Ill-conditioned normal equations: ridge jitter, flagged.
        a.diagonal().array() += 1e-10 * a.diagonal().mean();
        ldlt.compute(a);
        out.beta = ldlt.solve(xty);
        out.ridged = true;
    }
    const Eigen::VectorXd fitted = x * out.beta;
    out.rss = (y - fitted).squaredNorm();
    out.edf = ldlt.solve(xtx).trace();
    if (n - out.edf > 1e-8)
        out.gcv = n * out.rss / ((n - out.edf) * (n - out.edf));
    return out;
}

} // namespace

GamDesign build_design(const std::vector<WeeklyRecord>& records,
                       const std::vector<TermSpec>& specs) {
    if (records.empty()) throw EmptyInput("build_design: empty record list");
    GamDesign design;
    const int n = static_cast<int>(records.size());
    int total = 0;
    for (const auto& spec : specs) {
        SmoothTerm term;
        term.spec = spec;
        term.basis1 = make_basis(records, spec.cov1, spec.basis_dim1, spec.knot_rule);
        if (spec.kind == TermKind::tensor)
            term.basis2 = make_basis(records, spec.cov2, spec.basis_dim2, KnotRule::uniform);
        const int b = term.raw_dim();

        Eigen::MatrixXd raw(n, b);
        for (int i = 0; i < n; ++i)
            raw.row(i) = raw_row(term, records[static_cast<std::size_t>(i)], false).transpose();
        term.constraint = raw.colwise().sum().transpose();

        const Eigen::MatrixXd z = null_space(term.constraint);
        const Eigen::MatrixXd block = raw * z;
        Eigen::MatrixXd s = z.transpose() * raw_penalty(term) * z;
        // Trace normalization makes lambda comparable across terms and scales.
        const double sx = (block.transpose() * block).trace();
        const double sp = s.trace();
        term.penalty_scale = sp > 0.0 ? sx / sp : 1.0;
        s *= term.penalty_scale;
        term.penalty = std::move(s);

        design.col_offset.push_back(total);
        design.col_width.push_back(b - 1);
        total += b - 1;
        design.terms.push_back(std::move(term));
        design.design.conservativeResize(n, total);
        design.design.rightCols(b - 1) = block;
    }
    return design;
}

GamModel fit_gam(const std::vector<WeeklyRecord>& records, const std::vector<TermSpec>& specs,
                 const GamFitOptions& options) {
    for (const auto& r : records) r.validate();
    GamDesign design = build_design(records, specs);
    const int n = static_cast<int>(records.size());
    const int p = static_cast<int>(design.design.cols()) + 1;
    if (n <= 2 * static_cast<int>(specs.size()) + 1)
        throw InsufficientData("fit_gam: too few records for the requested terms");

    Eigen::MatrixXd x(n, p);
    x.col(0).setOnes();
    x.rightCols(p - 1) = design.design;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = records[static_cast<std::size_t>(i)].load;

    const Eigen::MatrixXd xtx = x.transpose() * x;
    const Eigen::VectorXd xty = x.transpose() * y;

    const std::size_t j_terms = design.terms.size();
    std::vector<double> grid;
    for (int i = 0; i < options.grid_points; ++i) {
        const double e = options.log10_lambda_min +
                         (options.log10_lambda_max - options.log10_lambda_min) * i /
                             static_cast<double>(options.grid_points - 1);
        grid.push_back(std::pow(10.0, e));
    }

    std::vector<double> lambdas(j_terms, grid[static_cast<std::size_t>(grid.size() / 2)]);
    if (options.fixed_lambda) {
        lambdas.assign(j_terms, *options.fixed_lambda);
    }

    Solved best = solve_penalized(xtx, xty, x, y, design, lambdas);
    if (!options.fixed_lambda) {
        for (int sweep = 0; sweep < options.sweeps; ++sweep) {
            for (std::size_t j = 0; j < j_terms; ++j) {
                for (double cand : grid) {
                    if (cand == lambdas[j]) continue;
                    std::vector<double> trial = lambdas;
                    trial[j] = cand;
                    Solved s = solve_penalized(xtx, xty, x, y, design, trial);
                    if (s.gcv < best.gcv) {
                        best = std::move(s);
                        lambdas = std::move(trial);
                    }
                }
            }
        }
    }

    GamModel model;
    model.intercept = best.beta(0);
    model.gcv = best.gcv;
    model.edf = best.edf;
    model.ridged = best.ridged;
    for (std::size_t j = 0; j < j_terms; ++j) {
        SmoothTerm term = design.terms[j];
        term.lambda_smooth = lambdas[j];
        term.coefs = best.beta.segment(design.col_offset[j] + 1, design.col_width[j]);
        model.terms.push_back(std::move(term));
    }

    const Eigen::VectorXd fitted = x * best.beta;
    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    model.pct_explained = tss > 0.0 ? 1.0 - best.rss / tss : 1.0;
    std::vector<double> pred(fitted.data(), fitted.data() + fitted.size());
    std::vector<double> truth(y.data(), y.data() + y.size());
    model.fitted_in_sample.mape = mape(pred, truth);
    model.fitted_in_sample.rmse = rmse(pred, truth);
    return model;
}

double term_value(const GamModel& model, std::size_t term_index, const WeeklyRecord& record) {
    const SmoothTerm& term = model.terms.at(term_index);
    const Eigen::VectorXd raw = raw_row(term, record, true);
    const Eigen::MatrixXd z = null_space(term.constraint);
    return (raw.transpose() * z * term.coefs)(0);
}

GamPrediction predict_gam_ex(const GamModel& model, const WeeklyRecord& record) {
    GamPrediction out;
    out.value = model.intercept;
    for (const auto& term : model.terms) {
        bool extrap = false;
        const Eigen::VectorXd raw = raw_row(term, record, true, &extrap);
        const Eigen::MatrixXd z = null_space(term.constraint);
        out.value += (raw.transpose() * z * term.coefs)(0);
        out.extrapolated = out.extrapolated || extrap;
    }
    return out;
}

double predict_gam(const GamModel& model, const WeeklyRecord& record) {
    return predict_gam_ex(model, record).value;
}

ModelComparison compare_models(const std::vector<WeeklyRecord>& records,
                               const std::vector<TermSpec>& spec1,
                               const std::vector<TermSpec>& spec2, double holdout_fraction) {
    const int n = static_cast<int>(records.size());
    const int n_hold = std::max(1, static_cast<int>(n * holdout_fraction));
    const int n_train = n - n_hold;
    if (n_train < 10) throw InsufficientData("compare_models: too few training records");
    std::vector<WeeklyRecord> train(records.begin(), records.begin() + n_train);
    std::vector<WeeklyRecord> hold(records.begin() + n_train, records.end());

    ModelComparison cmp;
    auto run = [&](const std::vector<TermSpec>& specs, ModelComparison::Side& side) {
        GamModel m = fit_gam(train, specs);
        side.gcv = m.gcv;
        side.pct_explained = m.pct_explained;
        side.in_sample = m.fitted_in_sample;
        std::vector<double> pred, truth;
        for (const auto& r : hold) {
            pred.push_back(predict_gam(m, r));
            truth.push_back(r.load);
        }
        side.holdout.mape = mape(pred, truth);
        side.holdout.rmse = rmse(pred, truth);
    };
    run(spec1, cmp.first);
    run(spec2, cmp.second);
    cmp.gcv_winner = cmp.second.gcv < cmp.first.gcv ? 1 : 0;
    return cmp;
}

std::string format_comparison(const ModelComparison& c) {
    auto line = [](const char* name, const ModelComparison::Side& s) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "%-8s gcv=%.6g pct=%.4f mape_in=%.4f rmse_in=%.2f mape_out=%.4f rmse_out=%.2f\n",
                      name, s.gcv, s.pct_explained, s.in_sample.mape, s.in_sample.rmse,
                      s.holdout.mape, s.holdout.rmse);
        return std::string(buf);
    };
    std::ostringstream os;
    os << line("spec1", c.first) << line("spec2", c.second)
       << "gcv winner: spec" << (c.gcv_winner + 1) << "\n";
    return os.str();
}

} // namespace loadfc
