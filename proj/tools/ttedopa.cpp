// ttedopa: command-line driver: chain coefficients, evolutions, sweeps, bath spectra, rate tables

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ttedopa/app/commands.hpp"

namespace app = ttedopa::app;

int main(int argc, char** argv) {
    CLI::App cli{"Finite-temperature open-system dynamics with chain-mapped baths and one-site TDVP"};
    cli.set_version_flag("--version", std::string(TTEDOPA_VERSION));
    cli.require_subcommand(1);

    app::Options o;
    std::string out = o.out.string();
    bool quiet = false;
    cli.add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    cli.add_option("--set", o.overrides, "Override a config key, section.key=value (repeatable)");
    cli.add_option("--out", out, "Output root directory")->capture_default_str();
    cli.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

    auto* chain = cli.add_subcommand("chain", "Compute (or load cached) chain coefficients");
    chain->add_option("--beta", o.beta, "Inverse temperature, a number or inf (overrides bath.beta)");

    auto* evolve = cli.add_subcommand("evolve", "Run one time evolution");
    evolve->add_flag("--resume", o.resume, "Continue from the run's checkpoint");

    auto* sweep = cli.add_subcommand("sweep", "Run the sweep.betas x sweep.epsilons grid and fit rates");
    sweep->add_flag("--resume", o.resume, "Keep finished runs and continue checkpointed ones");
    sweep->add_option("--jobs", o.jobs, "Concurrent runs (default: available cores)")->check(CLI::PositiveNumber);

    auto* spectrum = cli.add_subcommand("spectrum", "Bath occupation spectrum from a run's checkpoint");
    spectrum->add_option("--run", o.run, "Run directory (default: <out>/<run-id> from the config)");

    auto* rates = cli.add_subcommand("rates", "Fit rates for all electron-transfer runs under --out");

    for (auto* sub : {chain, evolve, sweep, spectrum, rates}) sub->fallthrough();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e);
    }
    o.out = out;

    auto logger = spdlog::stderr_color_mt("ttedopa");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (chain->parsed()) return app::cmd_chain(o);
        if (evolve->parsed()) return app::cmd_evolve(o);
        if (sweep->parsed()) return app::cmd_sweep(o);
        if (spectrum->parsed()) return app::cmd_spectrum(o);
        if (rates->parsed()) return app::cmd_rates(o);
    } catch (const ttedopa::InvalidInput& e) {
        spdlog::error("{}", e.what());
        return app::kInvalidInput;
    } catch (const ttedopa::IoError& e) {
        spdlog::error("{}", e.what());
        return app::kIoFailure;
    } catch (const ttedopa::NumericalFailure& e) {
        spdlog::error("{}", e.what());
        return app::kNumericalFailure;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return app::kFailure;
    }
    return app::kFailure;
}
