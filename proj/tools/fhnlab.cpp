#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "fhn/config.hpp"
#include "fhn/errors.hpp"
#include "fhn/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Pullback experiments for the stochastic FitzHugh-Nagumo system"};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "Run the experiments of a config and write CSV reports");
    run->add_option("--config", run_config, "JSON config file")->required();
    run->add_option("--experiment", experiment, "Override experiment.name")
        ->check(CLI::IsMember(fhn::kExperiments));
    run->add_option("--seed", seed, "Override experiment.seed");
    run->add_option("--out", out_dir, "Override output_dir");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "List config violations without running anything");
    validate->add_option("--config", validate_config, "JSON config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : fhn::kExitConfigInvalid;
    }

    try {
        if (*run) {
            fhn::RunConfig cfg = fhn::load_config(run_config);
            if (experiment) {
                cfg.experiment.name = *experiment;
            }
            if (seed) {
                cfg.experiment.seed = *seed;
            }
            if (out_dir) {
                cfg.output_dir = *out_dir;
            }
            const fhn::RunOutcome outcome = fhn::run(cfg, std::cout);
            std::cout << fmt::format("status {}\n", outcome.status);
            return outcome.status;
        }
        const fhn::RunConfig cfg = fhn::load_config(validate_config);
        const auto violations = fhn::validate(cfg);
        for (const auto& v : violations) {
            std::cout << v << "\n";
        }
        if (violations.empty()) {
            std::cout << "config is valid\n";
            return fhn::kExitPass;
        }
        return fhn::kExitConfigInvalid;
    } catch (const fhn::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return fhn::kExitConfigInvalid;
    }
}
