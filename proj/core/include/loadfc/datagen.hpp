#pragma once

#include "loadfc/calendar.hpp"
#include "loadfc/curves.hpp"
#include "loadfc/series.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace loadfc {
namespace datagen {

/// Deterministic normal/uniform source. Hand-rolled Box-Muller on top of
/// mt19937_64 so that streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(); // [0, 1)
    double normal();

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Gram-Schmidt under the grid's quadrature inner product; the result is
/// exactly orthonormal on the grid, which makes population spectra of
/// synthetic cross-covariances analytic.
std::vector<Curve> orthonormal_curves(const GridPtr& grid, int count, int wave_offset = 1);

/// Sample of (X_i, Y_i) curve pairs whose population cross-covariance has
/// exactly rank true_r: X_i carries AR(1) factor scores a_ij on orthonormal
/// loadings, Y_i carries theta_j a_ij plus independent score noise, and both
/// sides get independent white observation noise.
struct ReferencePairsConfig {
    int n = 200;
    int true_r = 3;
    int grid_size_y = 48;
    int grid_size_x = 48;
    double theta_scale = 1.5;   // theta_j = theta_scale * theta_decay^(j-1)
    double theta_decay = 0.85;
    double score_rho = 0.5;     // AR(1) coefficient of the factor scores
    double score_noise_sd = 0.4;
    double noise_y = 0.5;       // white observation noise per grid point
    double noise_x = 0.5;
    std::uint64_t seed = 1;
};

struct ReferencePairs {
    CurveSample sample;
    /// Population lambdas (squared singular values), descending; zero past
    /// true_r.
    Eigen::VectorXd true_lambdas;
};

ReferencePairs reference_pairs(const ReferencePairsConfig& cfg);

/// Calendar-aware synthetic scenario: weekly trend with known values, fixed
/// day-type profiles, rank-true_r day-to-day dynamics via vector AR(1)
/// factor scores, plus a seasonal temperature model.
struct ScenarioConfig {
    int years = 5;
    Date start{1996, 1, 1};
    double base_load = 50000.0;       // MW
    double trend_slope = 800.0;       // MW per year
    double annual_amplitude = 5000.0; // MW seasonal swing
    /// Zero-mean 48-point shape per day type; defaults built in when empty.
    std::array<Eigen::VectorXd, 8> day_profiles;
    int true_r = 3;
    /// 48-point loading curves of the cross-day factors; orthonormalized
    /// built-ins when empty.
    std::vector<Eigen::VectorXd> factor_loadings;
    Eigen::VectorXd factor_sd;        // stationary sd per factor (MW)
    double factor_rho = 0.85;
    double noise_sd = 300.0;          // MW per half-hour point
    double heat_gain = 500.0;         // MW per degC below threshold (weekly)
    double heat_threshold = 15.0;     // degC
    double temp_base = 12.0;
    double temp_annual_amp = 8.0;
    double temp_diurnal_amp = 3.0;
    double temp_ar_rho = 0.7;
    double temp_ar_sd = 2.0;
    double temp_noise_sd = 0.3;
    double cloud_mean = 0.5;
    double cloud_sd = 0.2;
    std::uint64_t seed = 1;

    /// Reference parameterization used across the test scenarios.
    static ScenarioConfig reference(int years, std::uint64_t seed);
};

struct GroundTruth {
    std::map<Date, double> weekly_trend;             // per Monday week start
    std::map<Date, Eigen::VectorXd> residual_curves; // profile + factors + noise
    Eigen::VectorXd population_lambdas;              // for consecutive-day pairs
    std::vector<Date> holidays;
};

struct Scenario {
    HalfHourlySeries load;
    WeatherSeries weather;
    GroundTruth truth;
};

Scenario generate(const ScenarioConfig& cfg);

/// Fixed-date holiday list emitted with each scenario.
std::vector<Date> scenario_holidays(int first_year, int years);

/// Day-type load profiles used by the generator (zero-mean, 48 points).
std::array<Eigen::VectorXd, 8> default_day_profiles();

} // namespace datagen
} // namespace loadfc
