#include "loadfc/commands.hpp"
#include "loadfc/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct CommonFlags {
    std::string config;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string variant, preset, cadence;
    bool model_flags = false;

    void attach(CLI::App* cmd, bool with_model_flags) {
        model_flags = with_model_flags;
        cmd->add_option("config", config, "configuration file")->required();
        cmd->add_option("--seed", seed, "override the scenario seed");
        if (with_model_flags) {
            cmd->add_option("--workers", workers, "worker threads for pair-model fitting");
            cmd->add_option("--variant", variant, "regressor variant (H1..H4)");
            cmd->add_option("--preset", preset, "trend preset (trend1|trend2)");
            cmd->add_option("--cadence", cadence, "refit cadence (once|per-week|per-day)");
        }
    }

    loadfc::commands::Overrides resolve(const CLI::App* cmd) const {
        loadfc::commands::Overrides ov;
        if (cmd->count("--seed")) ov.seed = seed;
        if (model_flags) {
            if (cmd->count("--workers")) ov.workers = workers;
            if (cmd->count("--variant")) ov.variant = variant;
            if (cmd->count("--preset")) ov.preset = preset;
            if (cmd->count("--cadence")) ov.cadence = cadence;
        }
        return ov;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid short-term electricity load forecasting"};
    app.require_subcommand(1);

    CommonFlags sim_flags, fit_flags, fc_flags;

    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic scenario");
    sim_flags.attach(sim, false);

    CLI::App* fit = app.add_subcommand("fit", "fit trend + curve models, write the model store");
    fit_flags.attach(fit, true);

    CLI::App* fc = app.add_subcommand("forecast", "forecast the eval window from a model store");
    fc_flags.attach(fc, true);
    std::string fc_start, fc_end;
    int fc_horizon = 0;
    fc->add_option("--start", fc_start, "first forecast date (overrides eval.start)");
    fc->add_option("--end", fc_end, "last forecast date (overrides eval.end)");
    fc->add_option("--horizon", fc_horizon, "forecast horizon in days");

    std::string forecast_csv, actual_csv, output_dir = ".";
    CLI::App* ev = app.add_subcommand("evaluate", "score forecasts against actual loads");
    ev->add_option("forecast_csv", forecast_csv, "forecast CSV")->required();
    ev->add_option("actual_csv", actual_csv, "actual load CSV")->required();
    ev->add_option("--output-dir", output_dir, "report output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            loadfc::commands::cmd_simulate(sim_flags.config, sim_flags.resolve(sim), &std::cout);
        else if (fit->parsed())
            loadfc::commands::cmd_fit(fit_flags.config, fit_flags.resolve(fit), &std::cout);
        else if (fc->parsed()) {
            auto ov = fc_flags.resolve(fc);
            if (fc->count("--start")) ov.eval_start = loadfc::parse_date(fc_start);
            if (fc->count("--end")) ov.eval_end = loadfc::parse_date(fc_end);
            if (fc->count("--horizon")) ov.horizon = fc_horizon;
            loadfc::commands::cmd_forecast(fc_flags.config, ov, &std::cout);
        }
        else if (ev->parsed())
            loadfc::commands::cmd_evaluate(forecast_csv, actual_csv, output_dir, &std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
