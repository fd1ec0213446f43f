#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "liouville/exponent.hpp"
#include "liouville/grid.hpp"
#include "liouville/kernels.hpp"

namespace liouville {

enum class ExperimentKind {
    sample_field,
    build_measure,
    simulate_lbm,
    estimate_exponents,
    verify_invariants,
    diagnostics,
    describe,
};

ExperimentKind experiment_from_name(const std::string& name);
std::string to_string(ExperimentKind kind);

struct PathSettings {
    double horizon = 1.0;
    double dt = 1e-4;
};

struct QuantumSettings {
    double horizon = 0.0;  // 0: use the clock terminal value
    double dt = 1e-3;
};

struct ExponentSettings {
    std::string kind = "clock";  // clock|measure|negative|holder|independence
    double order = 2.0;          // q or p
    int octaves = 4;
    double tolerance = 0.2;
};

/// Full description of one run. A run is reproducible from this struct plus
/// nothing else; the manifest serializes it next to every artifact.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::describe;
    SimulationParams params = SimulationParams::with_dyadic_schedule(1.0, 1.0, 8);
    int level = 0;  // 0: deepest level
    GridSpec grid{2.0, 256, true};
    MCConfig mc{256, 1, 0.99, false};
    PathSettings path;
    QuantumSettings quantum;
    ExponentSettings exponent;
    std::filesystem::path output_dir = "results";
    std::filesystem::path save_field;  // optional snapshot destination
    std::filesystem::path load_field;  // optional snapshot source

    int resolved_level() const { return level > 0 ? level : params.truncation; }

    /// Key-value form used by config files and the manifest.
    std::map<std::string, std::string> to_key_values() const;
};

/// Parses a key-value config file (one `key = value` per line, '#' comments)
/// and applies command-line overrides on top. Unknown or malformed keys
/// throw ParameterError naming the key.
ExperimentConfig load_config(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& overrides);

/// Builds a config from overrides alone.
ExperimentConfig config_from_key_values(
    const std::map<std::string, std::string>& values);

struct RunOutcome {
    int exit_code = 0;
    std::vector<std::filesystem::path> artifacts;
    std::uint64_t failed_replicas = 0;
    std::uint64_t total_replicas = 0;
};

/// Executes the experiment, writes its artifacts and a manifest into
/// output_dir, and reports the outcome. Exit codes: 0 success, 2 failed
/// verification, 3 replica failure fraction above one percent.
RunOutcome run(const ExperimentConfig& config);

/// Human-readable plan: resolved schedule, grid spacing, replica counts and
/// a memory estimate. Performs no sampling.
std::string describe(const ExperimentConfig& config);

std::string library_version();

}  // namespace liouville
