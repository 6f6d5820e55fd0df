#include <CLI11.hpp>

#include <iostream>

#include "polyhjb/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"polyhjb: polynomial feedback synthesis for quadratic-in-state systems"};
    app.require_subcommand(1);

    std::string config_path, gains_dir, info_dir;

    auto* gains = app.add_subcommand("gains", "synthesize Riccati and cubic feedback gains");
    gains->add_option("config", config_path, "run configuration (JSON)")->required();

    auto* simulate = app.add_subcommand("simulate", "closed-loop simulation and cost report");
    simulate->add_option("config", config_path, "run configuration (JSON)")->required();
    simulate->add_option("--gains", gains_dir, "directory produced by the gains command")
        ->required();

    auto* verify = app.add_subcommand("verify", "run the verification gate suite");
    verify->add_option("config", config_path, "run configuration (JSON)")->required();

    auto* info = app.add_subcommand("info", "summarize a gains/output directory");
    info->add_option("dir", info_dir, "directory to inspect")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gains->parsed()) return polyhjb::cmd_gains(polyhjb::parse_config(config_path));
        if (simulate->parsed())
            return polyhjb::cmd_simulate(polyhjb::parse_config(config_path), gains_dir);
        if (verify->parsed()) return polyhjb::cmd_verify(polyhjb::parse_config(config_path));
        if (info->parsed()) return polyhjb::cmd_info(info_dir);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
