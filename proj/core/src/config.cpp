#include "loadfc/config.hpp"
#include "loadfc/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace loadfc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

} // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

ConfigFile ConfigFile::parse_text(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                              full + "'");
        cfg.entries_[full] = Entry{value, line_no, false};
    }
    return cfg;
}

bool ConfigFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string ConfigFile::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        throw ConfigError(origin_ + ": missing required key '" + key + "'");
    it->second.used = true;
    return it->second.value;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double ConfigFile::get_double(const std::string& key) const {
    const std::string s = get_string(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
    return v;
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int ConfigFile::get_int(const std::string& key) const {
    const std::string s = get_string(key);
    int v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
    return v;
}

int ConfigFile::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigFile::get_u64(const std::string& key) const {
    const std::string s = get_string(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ConfigError(origin_ + ": key '" + key + "' is not an unsigned integer: '" + s +
                          "'");
    return v;
}

Date ConfigFile::get_date(const std::string& key) const { return parse_date(get_string(key)); }

void ConfigFile::reject_unknown_keys() const {
    for (const auto& [key, entry] : entries_) {
        if (!entry.used)
            throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" +
                              key + "'");
    }
}

ScenarioFileConfig ScenarioFileConfig::from(const ConfigFile& cfg) {
    ScenarioFileConfig out;
    auto& sc = out.scenario;
    sc.years = cfg.get_int("scenario.years");
    if (!cfg.has("scenario.seed"))
        throw ConfigError(cfg.origin() + ": missing required key 'scenario.seed'");
    sc.seed = cfg.get_u64("scenario.seed");
    if (cfg.has("scenario.start")) sc.start = cfg.get_date("scenario.start");
    sc.base_load = cfg.get_double("scenario.base_load", sc.base_load);
    sc.trend_slope = cfg.get_double("scenario.trend_slope", sc.trend_slope);
    sc.annual_amplitude = cfg.get_double("scenario.annual_amplitude", sc.annual_amplitude);
    sc.true_r = cfg.get_int("scenario.true_r", sc.true_r);
    sc.factor_rho = cfg.get_double("scenario.factor_rho", sc.factor_rho);
    sc.noise_sd = cfg.get_double("scenario.noise_sd", sc.noise_sd);
    sc.heat_gain = cfg.get_double("scenario.heat_gain", sc.heat_gain);
    sc.heat_threshold = cfg.get_double("scenario.heat_threshold", sc.heat_threshold);
    sc.temp_base = cfg.get_double("scenario.temp_base", sc.temp_base);
    sc.temp_annual_amp = cfg.get_double("scenario.temp_annual_amp", sc.temp_annual_amp);
    sc.temp_diurnal_amp = cfg.get_double("scenario.temp_diurnal_amp", sc.temp_diurnal_amp);
    sc.temp_ar_rho = cfg.get_double("scenario.temp_ar_rho", sc.temp_ar_rho);
    sc.temp_ar_sd = cfg.get_double("scenario.temp_ar_sd", sc.temp_ar_sd);
    sc.cloud_mean = cfg.get_double("scenario.cloud_mean", sc.cloud_mean);
    sc.cloud_sd = cfg.get_double("scenario.cloud_sd", sc.cloud_sd);
    // Factor scale: leading sd plus geometric decay, or the reference set.
    const datagen::ScenarioConfig ref = datagen::ScenarioConfig::reference(sc.years, sc.seed);
    if (cfg.has("scenario.factor_scale") || sc.true_r != ref.true_r) {
        const double scale = cfg.get_double("scenario.factor_scale", 1500.0);
        const double decay = cfg.get_double("scenario.factor_decay", 0.75);
        sc.factor_sd.resize(sc.true_r);
        for (int j = 0; j < sc.true_r; ++j) sc.factor_sd(j) = scale * std::pow(decay, j);
    } else {
        sc.factor_sd = ref.factor_sd;
    }
    out.load_csv = cfg.get_string("paths.load_csv", out.load_csv);
    out.weather_csv = cfg.get_string("paths.weather_csv", out.weather_csv);
    out.truth_file = cfg.get_string("paths.truth", out.truth_file);
    out.holidays_file = cfg.get_string("paths.holidays", out.holidays_file);
    cfg.reject_unknown_keys();
    return out;
}

RunConfig RunConfig::from(const ConfigFile& cfg) {
    RunConfig out;
    out.load_csv = cfg.get_string("paths.load_csv");
    out.weather_csv = cfg.get_string("paths.weather_csv");
    out.holidays_file = cfg.get_string("paths.holidays", "");
    out.model_store = cfg.get_string("paths.model_store", out.model_store);
    out.output_dir = cfg.get_string("paths.output_dir", out.output_dir);

    out.preset = cfg.get_string("model.preset", out.preset);
    out.spec.variant = variant_from_string(cfg.get_string("model.variant", "H2"));
    out.K = cfg.get_int("model.k", out.K);
    out.n_min = cfg.get_int("model.n_min", out.n_min);
    out.cadence = cadence_from_string(cfg.get_string("model.cadence", "per-week"));
    out.workers = cfg.get_int("model.workers", out.workers);

    const std::string method = cfg.get_string("dim.method", "ic_majority");
    if (method == "ratio") out.dim.method = DimSelectMethod::ratio;
    else if (method == "ic1") out.dim.method = DimSelectMethod::ic1;
    else if (method == "ic2") out.dim.method = DimSelectMethod::ic2;
    else if (method == "ic_majority") out.dim.method = DimSelectMethod::ic_majority;
    else throw ConfigError(cfg.origin() + ": unknown dim.method '" + method + "'");
    out.dim.d = cfg.get_int("dim.d", out.dim.d);
    if (cfg.has("dim.c_star")) out.dim.c_star = cfg.get_double("dim.c_star");
    out.dim.tau_grid_size = cfg.get_int("dim.tau_grid", out.dim.tau_grid_size);
    out.dim.g_exponent = cfg.get_double("dim.g_exponent", out.dim.g_exponent);
    out.dim.tau = cfg.get_double("dim.tau", out.dim.tau);

    if (cfg.has("train.start")) out.train_begin = cfg.get_date("train.start");
    if (cfg.has("train.end")) {
        out.train_end = cfg.get_date("train.end");
        out.train_end_set = true;
    }
    if (cfg.has("eval.start")) out.eval_start = cfg.get_date("eval.start");
    if (cfg.has("eval.end")) out.eval_end = cfg.get_date("eval.end");
    out.horizon = cfg.get_int("eval.horizon", out.horizon);
    if (cfg.has("eval.emit")) {
        out.emit.clear();
        std::istringstream ss(cfg.get_string("eval.emit"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t a = item.find_first_not_of(' ');
            std::size_t b = item.find_last_not_of(' ');
            if (a == std::string::npos) continue;
            out.emit.insert(kind_from_string(item.substr(a, b - a + 1)));
        }
        if (out.emit.empty()) throw ConfigError(cfg.origin() + ": eval.emit selects nothing");
    }
    cfg.reject_unknown_keys();
    return out;
}

} // namespace loadfc
