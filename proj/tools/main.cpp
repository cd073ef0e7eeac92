// Command-line front end: spectrum, coupling, heating, simulate, fit,
// calibrate. Exit codes: 0 success, 1 usage/config error, 2 numerical
// failure. Data goes to files under --out; logs go to stderr.
#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nearprobe/commands.hpp"
#include "nearprobe/errors.hpp"

using namespace nearprobe;

int main(int argc, char** argv) {
    CLI::App app{"near-field probing simulator for atoms in a fiber-side trap"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir = "out";
    long seed = -1;
    int threads = 0;
    app.add_option("--config", config_path, "configuration file (defaults apply when omitted)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "override mc.seed");
    app.add_option("--threads", threads, "worker thread cap (0 = hardware)");

    auto* spectrum = app.add_subcommand("spectrum", "bound-state table of the trap");
    auto* coupling = app.add_subcommand("coupling", "temperature sweep of coupling and survival");
    auto* heating = app.add_subcommand("heating", "Monte-Carlo heating tables");
    auto* simulate = app.add_subcommand("simulate", "run the configured pulse schedule");
    auto* fit_cmd = app.add_subcommand("fit", "fit a registered model to a data file");
    auto* calibrate = app.add_subcommand("calibrate", "coupling profile and cooling-rate calibration");

    std::string fit_model, fit_data;
    std::vector<double> window_us;
    fit_cmd->add_option("--model", fit_model, "double_exp | exp_lifetime | saturation_absorption | od_spectrum")
        ->required();
    fit_cmd->add_option("--data", fit_data, "two-column data file (x, value)")->required();
    fit_cmd->add_option("--window-us", window_us, "fit window relative to the first sample, microseconds")
        ->expected(2);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed >= 0) cfg.mc_seed = static_cast<uint64_t>(seed);
        cfg.threads = threads;
        Workspace ws(std::move(cfg));

        const auto t0 = std::chrono::steady_clock::now();
        if (spectrum->parsed()) cmd_spectrum(ws, out_dir);
        if (coupling->parsed()) cmd_coupling(ws, out_dir);
        if (heating->parsed()) cmd_heating(ws, out_dir);
        if (simulate->parsed()) cmd_simulate(ws, out_dir);
        if (fit_cmd->parsed()) {
            std::optional<std::pair<double, double>> window;
            if (window_us.size() == 2) window = {window_us[0], window_us[1]};
            cmd_fit(ws, fit_model, fit_data, window, out_dir);
        }
        if (calibrate->parsed()) cmd_calibrate(ws, out_dir);
        const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
        std::cerr << app.get_subcommands().front()->get_name() << ": done in " << dt.count()
                  << " s, outputs in " << out_dir << "\n";
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
