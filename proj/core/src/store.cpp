#include "loadfc/store.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace loadfc {

namespace {

constexpr const char* kMagic = "loadfc-store";
constexpr int kVersion = 1;

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

class Writer {
public:
    void kv(const std::string& key, const std::string& value) {
        out_ << key << " " << value << "\n";
    }
    void kv(const std::string& key, int value) { kv(key, std::to_string(value)); }
    void kv(const std::string& key, double value) { kv(key, hex_double(value)); }
    void section(const std::string& name) { out_ << "[" << name << "]\n"; }
    void vec(const std::string& key, const Eigen::VectorXd& v) {
        out_ << key << " " << v.size();
        for (Eigen::Index i = 0; i < v.size(); ++i) out_ << " " << hex_double(v(i));
        out_ << "\n";
    }
    void mat(const std::string& key, const Eigen::MatrixXd& m) {
        out_ << key << " " << m.rows() << " " << m.cols();
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) out_ << " " << hex_double(m(i, j));
        out_ << "\n";
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

class Reader {
public:
    Reader(const std::string& payload, std::string origin)
        : in_(payload), origin_(std::move(origin)) {}

    std::string token() {
        std::string t;
        if (!(in_ >> t)) throw StoreError(origin_ + ": truncated store file");
        return t;
    }
    void expect(const std::string& literal) {
        const std::string t = token();
        if (t != literal)
            throw StoreError(origin_ + ": expected '" + literal + "', got '" + t + "'");
    }
    int integer(const std::string& key) {
        expect(key);
        return std::stoi(token());
    }
    double number(const std::string& key) {
        expect(key);
        return parse_double(token());
    }
    std::string word(const std::string& key) {
        expect(key);
        return token();
    }
    Date date(const std::string& key) { return parse_date(word(key)); }
    Eigen::VectorXd vector(const std::string& key) {
        expect(key);
        const int n = std::stoi(token());
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = parse_double(token());
        return v;
    }
    Eigen::MatrixXd matrix(const std::string& key) {
        expect(key);
        const int r = std::stoi(token());
        const int c = std::stoi(token());
        Eigen::MatrixXd m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = parse_double(token());
        return m;
    }

private:
    double parse_double(const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size())
            throw StoreError(origin_ + ": malformed number '" + s + "'");
        return v;
    }

    std::istringstream in_;
    std::string origin_;
};

const char* kind_name(TermKind k) { return k == TermKind::univariate ? "uni" : "tensor"; }
const char* rule_name(KnotRule r) { return r == KnotRule::uniform ? "uniform" : "september"; }

void write_basis(Writer& w, const std::string& key, const BSplineBasis& basis) {
    w.kv(key + "_order", basis.order());
    w.vec(key + "_knots", basis.knots());
}

BSplineBasis read_basis(Reader& r, const std::string& key) {
    const int order = r.integer(key + "_order");
    Eigen::VectorXd knots = r.vector(key + "_knots");
    return BSplineBasis(std::move(knots), order);
}

void write_gam(Writer& w, const GamModel& gam) {
    w.section("gam");
    w.kv("intercept", gam.intercept);
    w.kv("gcv", gam.gcv);
    w.kv("edf", gam.edf);
    w.kv("pct_explained", gam.pct_explained);
    w.kv("mape_in", gam.fitted_in_sample.mape);
    w.kv("rmse_in", gam.fitted_in_sample.rmse);
    w.kv("ridged", gam.ridged ? 1 : 0);
    w.kv("terms", static_cast<int>(gam.terms.size()));
    for (const auto& term : gam.terms) {
        w.kv("kind", kind_name(term.spec.kind));
        w.kv("cov1", to_string(term.spec.cov1));
        w.kv("cov2", to_string(term.spec.cov2));
        w.kv("dim1", term.spec.basis_dim1);
        w.kv("dim2", term.spec.basis_dim2);
        w.kv("rule", rule_name(term.spec.knot_rule));
        write_basis(w, "basis1", term.basis1);
        if (term.spec.kind == TermKind::tensor) write_basis(w, "basis2", term.basis2);
        w.vec("constraint", term.constraint);
        w.kv("penalty_scale", term.penalty_scale);
        w.kv("lambda", term.lambda_smooth);
        w.vec("coefs", term.coefs);
    }
}

GamModel read_gam(Reader& r) {
    r.expect("[gam]");
    GamModel gam;
    gam.intercept = r.number("intercept");
    gam.gcv = r.number("gcv");
    gam.edf = r.number("edf");
    gam.pct_explained = r.number("pct_explained");
    gam.fitted_in_sample.mape = r.number("mape_in");
    gam.fitted_in_sample.rmse = r.number("rmse_in");
    gam.ridged = r.integer("ridged") != 0;
    const int n_terms = r.integer("terms");
    for (int i = 0; i < n_terms; ++i) {
        SmoothTerm term;
        term.spec.kind = r.word("kind") == "uni" ? TermKind::univariate : TermKind::tensor;
        term.spec.cov1 = covariate_from_string(r.word("cov1"));
        term.spec.cov2 = covariate_from_string(r.word("cov2"));
        term.spec.basis_dim1 = r.integer("dim1");
        term.spec.basis_dim2 = r.integer("dim2");
        term.spec.knot_rule = r.word("rule") == "september" ? KnotRule::september
                                                            : KnotRule::uniform;
        term.basis1 = read_basis(r, "basis1");
        if (term.spec.kind == TermKind::tensor) term.basis2 = read_basis(r, "basis2");
        term.constraint = r.vector("constraint");
        term.penalty_scale = r.number("penalty_scale");
        term.lambda_smooth = r.number("lambda");
        term.coefs = r.vector("coefs");
        gam.terms.push_back(std::move(term));
    }
    return gam;
}

void write_grid(Writer& w, const std::string& key, const Grid& grid) {
    w.vec(key + "_points", grid.points());
    w.vec(key + "_weights", grid.weights());
}

GridPtr read_grid(Reader& r, const std::string& key) {
    Eigen::VectorXd points = r.vector(key + "_points");
    Eigen::VectorXd weights = r.vector(key + "_weights");
    return Grid::make(std::move(points), std::move(weights));
}

void write_pair_model(Writer& w, const TrainedPairModel& tm) {
    w.kv("n", tm.n);
    w.kv("begin", format_date(tm.train_begin));
    w.kv("end", format_date(tm.train_end));
    w.kv("has_stats", tm.join_stats ? 1 : 0);
    if (tm.join_stats) {
        w.kv("load_mean", tm.join_stats->load.mean);
        w.kv("load_sd", tm.join_stats->load.sd);
        w.kv("temp_mean", tm.join_stats->temp.mean);
        w.kv("temp_sd", tm.join_stats->temp.sd);
    }
    const CurveRegressionModel& m = tm.model;
    w.kv("r_hat", m.r_hat);
    w.kv("k", m.n_regressor_terms);
    w.kv("cc_n", m.cross_cov.n);
    write_grid(w, "grid_y", m.cross_cov.mean_y.grid());
    write_grid(w, "grid_x", m.cross_cov.mean_x.grid());
    w.vec("mean_y", m.cross_cov.mean_y.values());
    w.vec("mean_x", m.cross_cov.mean_x.values());
    w.vec("lambdas", m.cross_cov.lambdas);
    w.mat("betas", m.betas);
    w.vec("resvar", m.residual_variances);
    for (int j = 0; j < m.r_hat; ++j) w.vec("phi", m.cross_cov.phis[static_cast<std::size_t>(j)].values());
    for (int k = 0; k < m.n_regressor_terms; ++k)
        w.vec("psi", m.cross_cov.psis[static_cast<std::size_t>(k)].values());
}

TrainedPairModel read_pair_model(Reader& r) {
    TrainedPairModel tm;
    tm.n = r.integer("n");
    tm.train_begin = r.date("begin");
    tm.train_end = r.date("end");
    if (r.integer("has_stats") != 0) {
        JoinStats stats;
        stats.load.mean = r.number("load_mean");
        stats.load.sd = r.number("load_sd");
        stats.temp.mean = r.number("temp_mean");
        stats.temp.sd = r.number("temp_sd");
        tm.join_stats = stats;
    }
    CurveRegressionModel& m = tm.model;
    m.r_hat = r.integer("r_hat");
    m.n_regressor_terms = r.integer("k");
    m.cross_cov.n = r.integer("cc_n");
    const GridPtr gy = read_grid(r, "grid_y");
    const GridPtr gx = read_grid(r, "grid_x");
    m.cross_cov.mean_y = Curve(gy, r.vector("mean_y"));
    m.cross_cov.mean_x = Curve(gx, r.vector("mean_x"));
    m.cross_cov.lambdas = r.vector("lambdas");
    m.betas = r.matrix("betas");
    m.residual_variances = r.vector("resvar");
    for (int j = 0; j < m.r_hat; ++j) m.cross_cov.phis.emplace_back(gy, r.vector("phi"));
    for (int k = 0; k < m.n_regressor_terms; ++k)
        m.cross_cov.psis.emplace_back(gx, r.vector("psi"));
    return tm;
}

std::string method_name(DimSelectMethod m) {
    switch (m) {
        case DimSelectMethod::ratio: return "ratio";
        case DimSelectMethod::ic1: return "ic1";
        case DimSelectMethod::ic2: return "ic2";
        case DimSelectMethod::ic_majority: return "ic_majority";
    }
    return "?";
}

DimSelectMethod method_from(const std::string& s) {
    if (s == "ratio") return DimSelectMethod::ratio;
    if (s == "ic1") return DimSelectMethod::ic1;
    if (s == "ic2") return DimSelectMethod::ic2;
    if (s == "ic_majority") return DimSelectMethod::ic_majority;
    throw StoreError("unknown dim method '" + s + "'");
}

} // namespace

std::string serialize_store(const ModelStore& store) {
    Writer w;
    w.section("meta");
    w.kv("preset", store.preset);
    w.kv("variant", to_string(store.spec.variant));
    w.kv("k", store.K);
    w.kv("n_min", store.n_min);
    w.kv("dim_method", method_name(store.dim.method));
    w.kv("dim_d", store.dim.d);
    w.kv("dim_c_star", store.dim.c_star ? hex_double(*store.dim.c_star) : std::string("auto"));
    w.kv("dim_tau_grid", store.dim.tau_grid_size);
    w.kv("dim_g_exponent", store.dim.g_exponent);
    w.kv("dim_tau", store.dim.tau);
    w.kv("train_begin", format_date(store.train_begin));
    w.kv("train_end", format_date(store.train_end));
    write_gam(w, store.gam);
    w.section("class_means");
    w.kv("count", static_cast<int>(store.registry.class_means.size()));
    for (const auto& [cls, cm] : store.registry.class_means) {
        w.kv("class", to_string(cls));
        w.kv("n", cm.n);
        w.vec("values", cm.mean.values());
    }
    w.section("pairs");
    w.kv("count", static_cast<int>(store.registry.models.size()));
    for (const auto& [key, set] : store.registry.models) {
        w.kv("prev", to_string(key.prev));
        w.kv("target", to_string(key.target));
        w.kv("parts", static_cast<int>(set.parts.size()));
        for (const auto& part : set.parts) write_pair_model(w, part);
    }
    return w.str();
}

ModelStore deserialize_store(const std::string& text, const std::string& origin) {
    Reader r(text, origin);
    r.expect("[meta]");
    ModelStore store;
    store.preset = r.word("preset");
    store.spec.variant = variant_from_string(r.word("variant"));
    store.K = r.integer("k");
    store.n_min = r.integer("n_min");
    store.dim.method = method_from(r.word("dim_method"));
    store.dim.d = r.integer("dim_d");
    const std::string c_star = r.word("dim_c_star");
    if (c_star != "auto") {
        char* end = nullptr;
        store.dim.c_star = std::strtod(c_star.c_str(), &end);
    }
    store.dim.tau_grid_size = r.integer("dim_tau_grid");
    store.dim.g_exponent = r.number("dim_g_exponent");
    store.dim.tau = r.number("dim_tau");
    store.train_begin = r.date("train_begin");
    store.train_end = r.date("train_end");
    store.gam = read_gam(r);

    store.registry.spec = store.spec;
    store.registry.dim_cfg = store.dim;
    store.registry.K = store.K;
    store.registry.n_min = store.n_min;
    store.registry.train_begin = store.train_begin;
    store.registry.train_end = store.train_end;

    r.expect("[class_means]");
    const int n_classes = r.integer("count");
    for (int i = 0; i < n_classes; ++i) {
        const DayClass cls = day_class_from_string(r.word("class"));
        ClassMean cm;
        cm.n = r.integer("n");
        cm.mean = Curve(day_grid(), r.vector("values"));
        store.registry.class_means.emplace(cls, std::move(cm));
    }
    r.expect("[pairs]");
    const int n_pairs = r.integer("count");
    for (int i = 0; i < n_pairs; ++i) {
        PairKey key;
        key.prev = day_class_from_string(r.word("prev"));
        key.target = day_class_from_string(r.word("target"));
        const int parts = r.integer("parts");
        PairModelSet set;
        for (int p = 0; p < parts; ++p) set.parts.push_back(read_pair_model(r));
        store.registry.models.emplace(key, std::move(set));
    }
    return store;
}

void save_store(const std::string& path, const ModelStore& store) {
    const std::string payload = serialize_store(store);
    std::ofstream out(path);
    if (!out) throw StoreError("cannot write model store: " + path);
    char head[64];
    std::snprintf(head, sizeof head, "%s %d\nchecksum %016" PRIx64 "\n", kMagic, kVersion,
                  fnv1a64(payload));
    out << head << payload;
}

ModelStore load_store(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StoreError("cannot open model store: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != kMagic) throw StoreError(path + ": not a model store");
    if (version != kVersion)
        throw StoreError(path + ": unsupported store version " + std::to_string(version));
    std::string checksum_word, checksum_hex;
    in >> checksum_word >> checksum_hex;
    if (checksum_word != "checksum") throw StoreError(path + ": missing checksum");
    std::string newline;
    std::getline(in, newline);
    std::ostringstream rest;
    rest << in.rdbuf();
    const std::string payload = rest.str();
    char expect[32];
    std::snprintf(expect, sizeof expect, "%016" PRIx64, fnv1a64(payload));
    if (checksum_hex != expect)
        throw StoreError(path + ": checksum mismatch, file corrupted");
    return deserialize_store(payload, path);
}

} // namespace loadfc
