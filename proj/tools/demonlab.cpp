// demonlab: run demon-cycle scenarios from a JSON config.
//
//   demonlab run --config <path> [--seed <u64>] [--trials <n>] [--out <path>] [--verbose]
//   demonlab verify --config <path>
//
// Exit status: 0 all assertions pass, 1 assertion or runtime failure, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "demonlab/errors.hpp"
#include "demonlab/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

} // namespace

int main(int argc, char** argv) {
    using namespace demonlab;

    CLI::App app{"Maxwell-demon measurement cycle simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out_path;
    bool verbose = false;

    auto* run = app.add_subcommand("run", "Run a scenario, write CSV and print a summary");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required();
    run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--trials", trials, "Override the trial count");
    run->add_option("--out", out_path, "CSV output path");
    run->add_flag("--verbose", verbose, "Print one line per trial");

    auto* verify = app.add_subcommand("verify", "Run a scenario and report only the exit status");
    verify->add_option("--config", config_path, "Scenario config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    runner::ScenarioConfig config;
    try {
        config = runner::load_config(config_path);
        if (seed) {
            config.seed = *seed;
        }
        if (trials) {
            config.trials = *trials;
        }
        runner::validate(config);
    } catch (const runner::ConfigError& e) {
        if (!verify->parsed()) {
            std::cerr << "config error: " << e.what() << '\n';
        }
        return kExitConfig;
    }

    try {
        const runner::ScenarioResult result = runner::run_scenario(config);
        if (verify->parsed()) {
            return result.summary.failures == 0 ? kExitOk : kExitFailure;
        }
        if (!out_path.empty()) {
            runner::emit_csv(result.records, out_path);
        }
        if (verbose) {
            for (const auto& r : result.records) {
                std::cout << "trial " << r.trial << " seed " << r.seed << ": " << (r.pass ? "pass" : "FAIL") << '\n';
            }
        }
        runner::print_summary(std::cout, result.summary);
        return result.summary.failures == 0 ? kExitOk : kExitFailure;
    } catch (const TheoremViolation& e) {
        if (!verify->parsed()) {
            std::cerr << "assertion failed: " << e.what() << '\n';
        }
        return kExitFailure;
    } catch (const std::exception& e) {
        if (!verify->parsed()) {
            std::cerr << "error: " << e.what() << '\n';
        }
        return kExitFailure;
    }
}
