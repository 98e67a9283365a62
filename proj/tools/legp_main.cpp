#include <CLI11.hpp>
#include <iostream>

#include "legp/cli.hpp"
#include "legp/common.hpp"

int main(int argc, char** argv) {
    CLI::App app{"legp: locally epistatic genomic prediction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", legp::cli::kVersion);

    std::string config_path;
    legp::cli::FlagOverrides overrides;

    const std::vector<std::string> commands = {"simulate", "fit",     "scan",   "test",
                                               "combine",  "predict", "select", "cross"};
    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", overrides.seed, "override config seed");
        sub->add_option("--out", overrides.out, "override output directory");
        sub->add_option("--threads", overrides.threads, "override worker count");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const legp::cli::RunConfig config = legp::cli::load_config(config_path, overrides);
        legp::cli::run_command(command, config);
    } catch (const legp::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const legp::numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
