// Experiment driver: configuration, seeding, artifact emission.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "liouville/experiments.hpp"
#include "liouville/kernels.hpp"

namespace {

struct CommonFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_file,
                    "Key-value config file; command-line flags win");
    auto bind = [&flags, cmd](const std::string& flag, const std::string& key,
                              const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&flags, key](const std::string& v) { flags.overrides[key] = v; },
            help);
    };
    bind("--seed", "mc.seed", "Master seed");
    bind("--replicas", "mc.replicas", "Monte Carlo replicas");
    bind("--gamma", "gamma", "Coupling constant in [0, 2)");
    bind("--mass", "mass", "Field mass m > 0");
    bind("--levels", "levels", "Number of decomposition levels N");
    bind("--level", "level", "Working level (0 = deepest)");
    bind("--out", "out", "Output directory");
    bind("--save-field", "save-field", "Write a field snapshot here");
    bind("--load-field", "load-field", "Read the field from a snapshot");
    bind("--grid-resolution", "grid.resolution", "Grid nodes per side");
    bind("--grid-extent", "grid.extent", "Grid side length");
    bind("--horizon", "path.horizon", "Path horizon T");
    bind("--dt", "path.dt", "Path time step");
    bind("--quantum-dt", "quantum.dt", "Quantum time step");
    bind("--exponent-kind", "exponent.kind",
         "clock | measure | negative | holder | independence");
    bind("--order", "exponent.order", "Moment order q or p");
    bind("--octaves", "exponent.octaves", "Scale octaves in regressions");
    bind("--tolerance", "exponent.tolerance", "Pass tolerance on slopes");
    cmd->add_option_function<std::string>(
        "--threads",
        [](const std::string& v) { setenv("LIOUVILLE_THREADS", v.c_str(), 1); },
        "Worker threads (default: hardware)");
}

int dispatch(const std::string& name, const CommonFlags& flags) {
    auto overrides = flags.overrides;
    overrides["experiment"] = name;
    const liouville::ExperimentConfig config =
        liouville::load_config(flags.config_file, overrides);

    if (config.experiment == liouville::ExperimentKind::describe) {
        std::cout << liouville::describe(config);
        return 0;
    }
    const liouville::RunOutcome outcome = liouville::run(config);
    if (outcome.failed_replicas > 0) {
        std::cerr << "warning: " << outcome.failed_replicas << " of "
                  << outcome.total_replicas << " replicas failed\n";
    }
    for (const auto& artifact : outcome.artifacts) {
        std::cout << artifact.string() << "\n";
    }
    return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian chaos measures and Liouville Brownian motion"};
    app.require_subcommand(1);

    const char* names[] = {"sample-field",      "build-measure", "simulate-lbm",
                           "estimate-exponents", "verify-invariants",
                           "diagnostics",        "describe"};
    const char* briefs[] = {
        "Sample a regularized field and write a snapshot",
        "Build the regularized measure and its ball-mass profile",
        "Run a clock and its time-changed path, write traces",
        "Monte Carlo scaling exponents with pass/fail records",
        "Degeneracy and consistency checks; nonzero exit on failure",
        "Potential convergence and clock stability tables",
        "Print the resolved plan without computing"};

    std::map<std::string, CommonFlags> flags;
    for (int i = 0; i < 7; ++i) {
        CLI::App* cmd = app.add_subcommand(names[i], briefs[i]);
        add_common_flags(cmd, flags[names[i]]);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();
    try {
        return dispatch(chosen, flags[chosen]);
    } catch (const liouville::ParameterError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
