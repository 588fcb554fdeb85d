#include "commands.hpp"

#include "npsa/errors.hpp"
#include "npsa/io.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

namespace {

// NPSA_LOG_LEVEL: trace, debug, info, warn (default), error, critical, off.
void configure_logging() {
    auto logger = spdlog::stderr_color_mt("npsa");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("NPSA_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
    using namespace npsa::cli;
    configure_logging();

    CLI::App app{"Norm-preserving structure-preserving function approximation"};
    app.set_version_flag("--version", std::string(npsa::version()));
    app.require_subcommand(1);

    RunOptions run;
    auto add_run_flags = [&run](CLI::App* sub) {
        sub->add_option("--config", run.config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", run.out_dir, "Output directory (overrides the config)");
        sub->add_option("--seed", run.seed, "RNG seed for 2-D multistart search");
        sub->add_option("--solver", run.solver, "greedy, average or hybrid")
            ->check(CLI::IsMember({"greedy", "average", "hybrid"}));
    };
    CLI::App* approximate = app.add_subcommand("approximate", "Run one constrained approximation");
    add_run_flags(approximate);
    CLI::App* sweep = app.add_subcommand("sweep", "Run one experiment per basis dimension");
    add_run_flags(sweep);

    std::string table;
    std::optional<std::string> reproduce_out;
    CLI::App* reproduce = app.add_subcommand("reproduce", "Compare preset runs against reference values");
    reproduce->add_option("--table", table, "table1, table2, table3, cylinder or all")->required();
    reproduce->add_option("--out", reproduce_out, "Directory for result CSVs and reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*approximate) return cmd_approximate(run);
        if (*sweep) return cmd_sweep(run);
        return cmd_reproduce(table, reproduce_out);
    } catch (const npsa::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const npsa::ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}
