#include "liouville/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "liouville/chaos_measure.hpp"
#include "liouville/clock.hpp"
#include "liouville/estimators.hpp"
#include "liouville/io.hpp"
#include "liouville/parallel.hpp"
#include "liouville/potentials.hpp"
#include "liouville/rng.hpp"
#include "liouville/stats.hpp"

namespace liouville {

std::string library_version() { return "0.1.0"; }

ExperimentKind experiment_from_name(const std::string& name) {
    if (name == "sample-field") return ExperimentKind::sample_field;
    if (name == "build-measure") return ExperimentKind::build_measure;
    if (name == "simulate-lbm") return ExperimentKind::simulate_lbm;
    if (name == "estimate-exponents") return ExperimentKind::estimate_exponents;
    if (name == "verify-invariants") return ExperimentKind::verify_invariants;
    if (name == "diagnostics") return ExperimentKind::diagnostics;
    if (name == "describe") return ExperimentKind::describe;
    throw ParameterError("experiment: unknown name '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sample_field: return "sample-field";
        case ExperimentKind::build_measure: return "build-measure";
        case ExperimentKind::simulate_lbm: return "simulate-lbm";
        case ExperimentKind::estimate_exponents: return "estimate-exponents";
        case ExperimentKind::verify_invariants: return "verify-invariants";
        case ExperimentKind::diagnostics: return "diagnostics";
        case ExperimentKind::describe: return "describe";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Config plumbing.

std::map<std::string, std::string> ExperimentConfig::to_key_values() const {
    std::map<std::string, std::string> kv;
    kv["experiment"] = to_string(experiment);
    kv["gamma"] = format_double(params.gamma);
    kv["mass"] = format_double(params.mass);
    kv["levels"] = std::to_string(params.truncation);
    kv["level"] = std::to_string(level);
    kv["grid.extent"] = format_double(grid.extent);
    kv["grid.resolution"] = std::to_string(grid.resolution);
    kv["grid.periodic"] = grid.periodic ? "true" : "false";
    kv["mc.replicas"] = std::to_string(mc.replicas);
    kv["mc.seed"] = std::to_string(mc.seed);
    kv["mc.confidence"] = format_double(mc.confidence);
    kv["mc.quenched"] = mc.quenched ? "true" : "false";
    kv["path.horizon"] = format_double(path.horizon);
    kv["path.dt"] = format_double(path.dt);
    kv["quantum.horizon"] = format_double(quantum.horizon);
    kv["quantum.dt"] = format_double(quantum.dt);
    kv["exponent.kind"] = exponent.kind;
    kv["exponent.order"] = format_double(exponent.order);
    kv["exponent.octaves"] = std::to_string(exponent.octaves);
    kv["exponent.tolerance"] = format_double(exponent.tolerance);
    kv["out"] = output_dir.string();
    if (!save_field.empty()) kv["save-field"] = save_field.string();
    if (!load_field.empty()) kv["load-field"] = load_field.string();
    return kv;
}

namespace {

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("config: bad value for '" + key + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParameterError("config: bad value for '" + key + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ParameterError("config: bad value for '" + key + "'");
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

ExperimentConfig config_from_key_values(
    const std::map<std::string, std::string>& values) {
    ExperimentConfig config;
    double gamma = config.params.gamma;
    double mass = config.params.mass;
    int levels = config.params.truncation;

    for (const auto& [key, value] : values) {
        if (key == "experiment") {
            config.experiment = experiment_from_name(value);
        } else if (key == "gamma") {
            gamma = parse_real(key, value);
        } else if (key == "mass") {
            mass = parse_real(key, value);
        } else if (key == "levels") {
            levels = static_cast<int>(parse_int(key, value));
        } else if (key == "level") {
            config.level = static_cast<int>(parse_int(key, value));
        } else if (key == "grid.extent") {
            config.grid.extent = parse_real(key, value);
        } else if (key == "grid.resolution") {
            config.grid.resolution = static_cast<int>(parse_int(key, value));
        } else if (key == "grid.periodic") {
            config.grid.periodic = parse_bool(key, value);
        } else if (key == "mc.replicas") {
            config.mc.replicas = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "mc.seed") {
            config.mc.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "mc.confidence") {
            config.mc.confidence = parse_real(key, value);
        } else if (key == "mc.quenched") {
            config.mc.quenched = parse_bool(key, value);
        } else if (key == "path.horizon") {
            config.path.horizon = parse_real(key, value);
        } else if (key == "path.dt") {
            config.path.dt = parse_real(key, value);
        } else if (key == "quantum.horizon") {
            config.quantum.horizon = parse_real(key, value);
        } else if (key == "quantum.dt") {
            config.quantum.dt = parse_real(key, value);
        } else if (key == "exponent.kind") {
            config.exponent.kind = value;
        } else if (key == "exponent.order") {
            config.exponent.order = parse_real(key, value);
        } else if (key == "exponent.octaves") {
            config.exponent.octaves = static_cast<int>(parse_int(key, value));
        } else if (key == "exponent.tolerance") {
            config.exponent.tolerance = parse_real(key, value);
        } else if (key == "out") {
            config.output_dir = value;
        } else if (key == "save-field") {
            config.save_field = value;
        } else if (key == "load-field") {
            config.load_field = value;
        } else {
            throw ParameterError("config: unknown key '" + key + "'");
        }
    }

    try {
        config.params = SimulationParams::with_dyadic_schedule(gamma, mass, levels);
    } catch (const ParameterError& err) {
        throw ParameterError(std::string("config: ") + err.what() +
                             " (keys gamma/mass/levels)");
    }
    config.grid.validate();
    config.mc.validate();
    if (config.level < 0 || config.level > config.params.truncation)
        throw ParameterError("config: bad value for 'level'");
    if (!(config.path.horizon > 0) || !(config.path.dt > 0))
        throw ParameterError("config: bad value for 'path.horizon'/'path.dt'");
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& overrides) {
    std::map<std::string, std::string> values;
    if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) throw ParameterError("config: cannot open " + config_file.string());
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trimmed(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParameterError("config: expected 'key = value', got '" + line + "'");
            values[trimmed(line.substr(0, eq))] = trimmed(line.substr(eq + 1));
        }
    }
    for (const auto& [key, value] : overrides) values[key] = value;  // overrides win
    return config_from_key_values(values);
}

// ---------------------------------------------------------------------------
// describe

std::string describe(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "experiment: " << to_string(config.experiment) << "\n";
    out << "schedule:   c_n =";
    for (double c : config.params.scale_schedule) out << " " << format_double(c);
    out << "  (N = " << config.params.truncation << ")\n";
    out << "gamma: " << format_double(config.params.gamma)
        << "   mass: " << format_double(config.params.mass)
        << "   level: " << config.resolved_level() << "\n";
    out << "grid:  " << config.grid.resolution << "^2 "
        << (config.grid.periodic ? "periodic" : "open")
        << ", extent " << format_double(config.grid.extent) << ", spacing "
        << format_double(config.grid.spacing()) << "\n";
    out << "monte carlo: " << config.mc.replicas << " replicas, seed "
        << config.mc.seed << ", "
        << (config.mc.quenched ? "quenched" : "annealed") << "\n";
    out << "path: horizon " << format_double(config.path.horizon) << ", dt "
        << format_double(config.path.dt) << " ("
        << static_cast<long long>(std::ceil(config.path.horizon / config.path.dt))
        << " steps)\n";

    const double bytes = static_cast<double>(config.params.truncation) *
                         config.grid.resolution * config.grid.resolution * 8.0;
    out << "memory estimate: layers x grid x 8 bytes = "
        << static_cast<long long>(bytes) << " bytes\n";

    out << "exercised: ";
    switch (config.experiment) {
        case ExperimentKind::sample_field:
            out << "layer covariances and the regularized field decomposition";
            break;
        case ExperimentKind::build_measure:
            out << "measure normalization and ball-mass profiles";
            break;
        case ExperimentKind::simulate_lbm:
            out << "clock construction, inverse clock and the time change";
            break;
        case ExperimentKind::estimate_exponents:
            out << "scaling exponents (" << config.exponent.kind << ")";
            break;
        case ExperimentKind::verify_invariants:
            out << "degeneracy identities and kernel consistency";
            break;
        case ExperimentKind::diagnostics:
            out << "potential convergence and clock stability";
            break;
        case ExperimentKind::describe:
            out << "nothing (plan only)";
            break;
    }
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// run

namespace {

struct ArtifactSink {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> artifacts;

    std::filesystem::path file(const std::string& name) {
        std::filesystem::path p = dir / name;
        artifacts.push_back(p);
        return p;
    }
};

FieldStack obtain_field(const ExperimentConfig& config) {
    if (!config.load_field.empty()) return load_field_snapshot(config.load_field);
    LevelFieldSampler sampler(config.params, config.resolved_level(), config.grid);
    return sampler.sample(config.mc.seed, 0);
}

void run_sample_field(const ExperimentConfig& config, ArtifactSink& sink) {
    const FieldStack stack = obtain_field(config);
    const int level = config.resolved_level();
    const auto target = config.save_field.empty()
                            ? sink.file("field.bin")
                            : [&] {
                                  sink.artifacts.push_back(config.save_field);
                                  return config.save_field;
                              }();
    save_field_snapshot(stack, level, target);
}

void run_build_measure(const ExperimentConfig& config, ArtifactSink& sink) {
    FieldStack stack = obtain_field(config);
    const int level = stack.has_level(config.resolved_level())
                          ? config.resolved_level()
                          : stack.top_level();
    const ChaosMeasureGrid measure = build_measure(stack, level, config.params.gamma);
    if (!config.save_field.empty()) {
        save_field_snapshot(stack, level, config.save_field);
        sink.artifacts.push_back(config.save_field);
    }

    CsvWriter csv(sink.file("measure.csv"),
                  {"gamma", "p_or_q", "level", "radius", "statistic", "stderr",
                   "replicas", "seed"});
    std::vector<double> radii;
    for (int j = 0; j < 6; ++j)
        radii.push_back(0.25 * config.grid.extent * std::ldexp(1.0, -j));
    const BallMassProfile profile = ball_mass_profile(measure, {0.0, 0.0}, radii);
    for (std::size_t i = 0; i < profile.radii.size(); ++i) {
        csv.row({config.params.gamma, 1.0, double(level), profile.radii[i],
                 profile.masses[i], 0.0, 1.0, double(config.mc.seed)});
    }
    csv.row({config.params.gamma, 1.0, double(level), 0.5 * config.grid.extent,
             measure.total_mass(), 0.0, 1.0, double(config.mc.seed)});
}

std::uint64_t run_simulate_lbm(const ExperimentConfig& config, ArtifactSink& sink) {
    const FieldStack stack = obtain_field(config);
    const int level = stack.has_level(config.resolved_level())
                          ? config.resolved_level()
                          : stack.top_level();
    const BrownianPath path = sample_path({0.0, 0.0}, config.path.horizon,
                                          config.path.dt, config.mc.seed);
    const PathClock clock = compute_clock(path, stack, level, config.params.gamma);
    const double quantum_horizon = config.quantum.horizon > 0
                                       ? config.quantum.horizon
                                       : clock.terminal();
    if (quantum_horizon > clock.terminal())
        throw DomainError("simulate-lbm: quantum horizon exceeds the clock range");
    const LBMPath lbm = build_lbm(path, clock, config.quantum.dt, quantum_horizon);

    CsvWriter trace(sink.file("lbm_trace.csv"),
                    {"quantum_t", "x", "y", "classical_t"});
    for (std::size_t k = 0; k < lbm.quantum_times.size(); ++k) {
        trace.row({lbm.quantum_times[k], lbm.positions[k].x, lbm.positions[k].y,
                   lbm.classical_times[k]});
    }
    CsvWriter clock_csv(sink.file("clock_trace.csv"),
                        {"classical_t", "F_value", "level"});
    for (std::size_t k = 0; k < clock.values.size(); ++k) {
        clock_csv.row({path.time_of(k), clock.values[k], double(level)});
    }
    return clock.truncated_at ? 1 : 0;
}

void write_scaling_csv(const std::filesystem::path& path, double gamma,
                       double order, int level, const ScalingEstimate& scaling,
                       const MCConfig& mc) {
    CsvWriter csv(path, {"gamma", "p_or_q", "level", "radius", "statistic",
                         "stderr", "replicas", "seed"});
    for (const auto& pt : scaling.points) {
        csv.row({gamma, order, double(level), pt.scale, pt.statistic,
                 pt.stderr_of_statistic, double(mc.replicas), double(mc.seed)});
    }
}

std::uint64_t run_estimate_exponents(const ExperimentConfig& config,
                                     ArtifactSink& sink, int& exit_code) {
    const double gamma = config.params.gamma;
    const int level = config.resolved_level();
    const double order = config.exponent.order;
    const double tol = config.exponent.tolerance;
    std::vector<ResultRecord> records;
    std::uint64_t failed = 0;

    ClockExperiment experiment{config.params, level, config.grid, config.path.dt};

    if (config.exponent.kind == "clock") {
        std::vector<double> scales;
        for (int j = 0; j <= config.exponent.octaves; ++j)
            scales.push_back(config.path.horizon * std::ldexp(1.0, -j));
        const ScalingEstimate scaling =
            estimate_clock_scaling(config.mc, experiment, order, scales);
        failed = scaling.failed_replicas;
        const double expected = clock_spectrum_exponent(gamma, order);
        records.push_back({"clock-spectrum", gamma, level, order,
                           scaling.estimate.slope, scaling.estimate.stderr_of_slope,
                           expected, tol,
                           std::abs(scaling.estimate.slope - expected) <= tol});
        write_scaling_csv(sink.file("scaling.csv"), gamma, order, level, scaling,
                          config.mc);
    } else if (config.exponent.kind == "measure") {
        LevelFieldSampler sampler(config.params, level, config.grid);
        auto ensemble = [&](std::uint64_t rep) {
            const FieldStack stack = sampler.sample(config.mc.seed, rep);
            return build_measure(stack, level, gamma);
        };
        std::vector<double> radii;
        for (int j = 0; j <= config.exponent.octaves; ++j)
            radii.push_back(0.25 * config.grid.extent * std::ldexp(1.0, -j));
        const ScalingEstimate scaling = estimate_moment_scaling(
            ensemble, config.mc.replicas, order, radii, config.mc.seed);
        const double expected = measure_spectrum_exponent(gamma, order);
        records.push_back({"measure-spectrum", gamma, level, order,
                           scaling.estimate.slope, scaling.estimate.stderr_of_slope,
                           expected, tol,
                           std::abs(scaling.estimate.slope - expected) <= tol});
        write_scaling_csv(sink.file("scaling.csv"), gamma, order, level, scaling,
                          config.mc);
    } else if (config.exponent.kind == "negative") {
        std::vector<double> radii;
        for (int j = 0; j <= config.exponent.octaves; ++j)
            radii.push_back(0.2 * config.grid.extent * std::ldexp(1.0, -j));
        const ScalingEstimate scaling =
            estimate_negative_moments(config.mc, experiment, order, radii);
        failed = scaling.failed_replicas;
        const double expected = 2.0 * clock_spectrum_exponent(gamma, -order);
        records.push_back({"negative-moments", gamma, level, order,
                           scaling.estimate.slope, scaling.estimate.stderr_of_slope,
                           expected, tol,
                           scaling.estimate.slope >= expected - tol});
        write_scaling_csv(sink.file("scaling.csv"), gamma, order, level, scaling,
                          config.mc);
    } else if (config.exponent.kind == "holder") {
        const HolderEstimate holder = estimate_holder(
            config.mc, experiment, config.path.horizon, config.exponent.octaves);
        const double alpha = holder_upper_exponent(gamma);
        const double beta = holder_lower_exponent(gamma);
        records.push_back({"holder-upper", gamma, level, 0.0, holder.upper.slope,
                           holder.upper.stderr_of_slope, alpha, tol,
                           holder.upper.slope >= alpha - tol});
        records.push_back({"holder-lower", gamma, level, 0.0, holder.lower.slope,
                           holder.lower.stderr_of_slope, beta, tol,
                           holder.lower.slope <= beta + tol});
    } else if (config.exponent.kind == "independence") {
        std::vector<int> levels;
        for (int n = 1; n <= config.params.truncation; ++n) levels.push_back(n);
        const ScalingEstimate scaling = independence_decay(
            config.mc, experiment, levels, config.path.horizon);
        failed = scaling.failed_replicas;
        const double expected = -gamma * gamma / 8.0;
        records.push_back({"independence-decay", gamma, level, 0.0,
                           scaling.estimate.slope, scaling.estimate.stderr_of_slope,
                           expected, tol,
                           std::abs(scaling.estimate.slope - expected) <= tol});
        write_scaling_csv(sink.file("scaling.csv"), gamma, 0.0, level, scaling,
                          config.mc);
    } else {
        throw ParameterError("config: bad value for 'exponent.kind'");
    }

    write_results_json(records, sink.file("results.json"));
    for (const auto& r : records) {
        if (!r.pass) exit_code = 2;
    }
    return failed;
}

int run_verify_invariants(const ExperimentConfig& config, ArtifactSink& sink) {
    std::vector<ResultRecord> records;
    const std::uint64_t seed = config.mc.seed;

    // Kernel route consistency at a few radii.
    {
        double worst = 0.0;
        for (double r : {0.25, 0.5, 1.0, 2.0}) {
            const double direct = eval_massive_green(config.params.mass, r);
            const double star = eval_star_integral(config.params.mass, r);
            worst = std::max(worst, std::abs(direct - star));
        }
        records.push_back({"kernel-consistency", 0.0, 0, 0.0, worst, 0.0, 0.0,
                           1e-6, worst <= 1e-6});
    }

    // Degeneracy identities at gamma = 0.
    {
        SimulationParams flat = config.params;
        flat.gamma = 0.0;
        GridSpec grid{2.0, 64, false};
        LevelFieldSampler sampler(flat, flat.truncation, grid);
        const FieldStack stack = sampler.sample(seed, 0);
        const double dt = 1.0 / 1024.0;
        const BrownianPath path = sample_path({0.0, 0.0}, 0.25, dt, seed);
        const PathClock clock = compute_clock(path, stack, flat.truncation, 0.0);

        double clock_dev = 0.0;
        for (std::size_t k = 0; k < clock.values.size(); ++k) {
            clock_dev = std::max(clock_dev,
                                 std::abs(clock.values[k] - path.time_of(k)));
        }
        records.push_back({"degenerate-clock", 0.0, flat.truncation, 0.0,
                           clock_dev, 0.0, 0.0, 1e-12, clock_dev <= 1e-12});

        const LBMPath lbm = build_lbm(path, clock, dt, clock.terminal());
        double lbm_dev = 0.0;
        for (std::size_t k = 0; k < lbm.positions.size(); ++k) {
            lbm_dev = std::max({lbm_dev,
                                std::abs(lbm.positions[k].x - path.positions[k].x),
                                std::abs(lbm.positions[k].y - path.positions[k].y)});
        }
        records.push_back({"degenerate-lbm", 0.0, flat.truncation, 0.0, lbm_dev,
                           0.0, 0.0, 1e-12, lbm_dev <= 1e-12});

        const ChaosMeasureGrid measure = build_measure(stack, flat.truncation, 0.0);
        const double cell = measure.cell_area();
        double mass_dev = 0.0;
        for (double m : measure.cell_mass.data())
            mass_dev = std::max(mass_dev, std::abs(m - cell));
        records.push_back({"degenerate-measure", 0.0, flat.truncation, 0.0,
                           mass_dev, 0.0, 0.0, 0.0, mass_dev == 0.0});
    }

    // Normalization smoke test at the configured gamma.
    {
        GridSpec grid{1.0, 128, true};
        LevelFieldSampler sampler(config.params, config.params.truncation, grid);
        std::vector<double> masses(64);
        parallel_for(masses.size(), [&](std::size_t rep) {
            const FieldStack stack = sampler.sample(seed, rep);
            masses[rep] =
                build_measure(stack, config.params.truncation, config.params.gamma)
                    .total_mass();
        });
        const MeanStderr ms = mean_stderr(masses);
        const double dev = std::abs(ms.mean - 1.0);
        const double tol = 4.0 * ms.stderr_of_mean;
        records.push_back({"mean-mass", config.params.gamma,
                           config.params.truncation, 0.0, ms.mean,
                           ms.stderr_of_mean, 1.0, tol, dev <= tol});
    }

    write_results_json(records, sink.file("results.json"));
    for (const auto& r : records) {
        if (!r.pass) return 2;
    }
    return 0;
}

void run_diagnostics(const ExperimentConfig& config, ArtifactSink& sink) {
    StackSampler sampler(config.params, config.grid);
    const FieldStack stack = sampler.sample(config.mc.seed, 0);
    const double gamma = config.params.gamma;
    const int top = config.params.truncation;
    const double radius = 0.4 * config.grid.extent;
    const auto eval_points = ball_eval_points(radius, 17);

    std::vector<int> levels;
    for (int n = 2; n <= top; ++n) levels.push_back(n);
    const LevelPotentialDiagnostics diag =
        potential_convergence(stack, gamma, levels, radius, eval_points);

    CsvWriter csv(sink.file("diagnostics.csv"),
                  {"n", "d_R_value", "sup_potential", "eta", "exceedance_prob"});
    for (std::size_t l = 0; l < diag.levels.size(); ++l) {
        csv.row({double(diag.levels[l]), diag.distance_to_top[l],
                 diag.sup_potential[l], 0.0, 0.0});
    }

    // Clock stability between the two deepest levels.
    const ChaosMeasureGrid mu = build_measure(stack, top - 1, gamma);
    const ChaosMeasureGrid nu = build_measure(stack, top, gamma);
    std::vector<BrownianPath> paths;
    const std::uint64_t n_paths = std::min<std::uint64_t>(config.mc.replicas, 256);
    for (std::uint64_t i = 0; i < n_paths; ++i) {
        paths.push_back(sample_path({0.0, 0.0}, config.path.horizon, config.path.dt,
                                    derive_stream(config.mc.seed, i, 77)));
    }
    const ClockStabilityDiagnostic stability =
        clock_stability_vs_distance(paths, mu, nu, radius, eval_points);
    for (std::size_t e = 0; e < stability.eta.size(); ++e) {
        csv.row({double(top - 1), stability.distance, stability.sup_potential_mu,
                 stability.eta[e], stability.exceedance[e]});
    }
}

}  // namespace

RunOutcome run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    outcome.total_replicas = config.mc.replicas;

    std::filesystem::create_directories(config.output_dir);
    ArtifactSink sink{config.output_dir, {}};

    switch (config.experiment) {
        case ExperimentKind::describe: {
            // Plan only; still goes through the sink for the manifest.
            std::ofstream plan(sink.file("plan.txt"));
            plan << describe(config);
            break;
        }
        case ExperimentKind::sample_field:
            run_sample_field(config, sink);
            break;
        case ExperimentKind::build_measure:
            run_build_measure(config, sink);
            break;
        case ExperimentKind::simulate_lbm:
            outcome.failed_replicas = run_simulate_lbm(config, sink);
            break;
        case ExperimentKind::estimate_exponents:
            outcome.failed_replicas =
                run_estimate_exponents(config, sink, outcome.exit_code);
            break;
        case ExperimentKind::verify_invariants:
            outcome.exit_code = run_verify_invariants(config, sink);
            break;
        case ExperimentKind::diagnostics:
            run_diagnostics(config, sink);
            break;
    }

    // A replica failure fraction above one percent fails the run outright.
    if (outcome.total_replicas > 0 &&
        static_cast<double>(outcome.failed_replicas) >
            0.01 * static_cast<double>(outcome.total_replicas)) {
        outcome.exit_code = 3;
    }

    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    nlohmann::json manifest;
    manifest["config"] = config.to_key_values();
    manifest["seed"] = config.mc.seed;
    manifest["version"] = library_version();
    manifest["wall_time_s"] = elapsed;
    manifest["failed_replicas"] = outcome.failed_replicas;
    manifest["total_replicas"] = outcome.total_replicas;
    manifest["exit_code"] = outcome.exit_code;
    nlohmann::json artifact_names = nlohmann::json::array();
    for (const auto& a : sink.artifacts) artifact_names.push_back(a.filename().string());
    manifest["artifacts"] = artifact_names;
    std::ofstream mf(config.output_dir / "manifest.json");
    mf << manifest.dump(2) << '\n';

    outcome.artifacts = std::move(sink.artifacts);
    return outcome;
}

}  // namespace liouville
