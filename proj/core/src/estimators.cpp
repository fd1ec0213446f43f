#include "liouville/estimators.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "liouville/chaos_measure.hpp"
#include "liouville/parallel.hpp"
#include "liouville/rng.hpp"
#include "liouville/stats.hpp"

namespace liouville {

void ClockExperiment::validate() const {
    params.validate();
    grid.validate();
    if (level < 1 || level > params.truncation)
        throw ParameterError("experiment: level out of range");
    if (!(dt > 0)) throw ParameterError("experiment: dt must be positive");
}

namespace {

std::uint64_t path_seed(const MCConfig& config, std::uint64_t replica) {
    return derive_stream(config.seed, replica,
                         static_cast<std::uint64_t>(StreamPurpose::path));
}

ExponentEstimate fit_points(const std::vector<ScalePoint>& points,
                            std::uint64_t replicas, std::uint64_t seed) {
    std::vector<double> x, y, sigma;
    for (const auto& pt : points) {
        if (!(pt.statistic > 0)) continue;
        x.push_back(std::log(pt.scale));
        y.push_back(std::log(pt.statistic));
        sigma.push_back(pt.stderr_of_statistic > 0
                            ? pt.stderr_of_statistic / pt.statistic
                            : 0.0);
    }
    if (x.size() < 2) throw ParameterError("estimator: fewer than two usable scales");
    const bool weighted =
        std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0; });
    const LineFit fit = weighted ? fit_line(x, y, sigma) : fit_line(x, y);
    ExponentEstimate est;
    est.slope = fit.slope;
    est.stderr_of_slope = fit.slope_stderr;
    est.r_squared = fit.r_squared;
    est.scale_window = {std::exp(x.front()), std::exp(x.back())};
    est.replicas = replicas;
    est.seed = seed;
    return est;
}

// Shared replica loop: fills a per-replica row of statistics or marks the
// replica failed. Reductions happen on the slot vectors afterwards, so the
// result is independent of thread scheduling.
struct ReplicaTable {
    std::vector<std::vector<double>> values;  // [scale][replica]
    std::vector<char> failed;

    ReplicaTable(std::size_t scales, std::size_t replicas)
        : values(scales, std::vector<double>(replicas, 0.0)),
          failed(replicas, 0) {}

    std::uint64_t failure_count() const {
        std::uint64_t n = 0;
        for (char f : failed) n += f;
        return n;
    }

    std::vector<ScalePoint> reduce(const std::vector<double>& scales) const {
        std::vector<ScalePoint> points;
        for (std::size_t s = 0; s < scales.size(); ++s) {
            std::vector<double> ok;
            ok.reserve(values[s].size());
            for (std::size_t r = 0; r < values[s].size(); ++r) {
                if (!failed[r]) ok.push_back(values[s][r]);
            }
            if (ok.size() < 2) throw ParameterError("estimator: too many failed replicas");
            const MeanStderr ms = mean_stderr(ok);
            points.push_back({scales[s], ms.mean, ms.stderr_of_mean});
        }
        return points;
    }
};

}  // namespace

ScalingEstimate estimate_clock_scaling(const MCConfig& config,
                                       const ClockExperiment& experiment,
                                       double q, std::vector<double> s_values) {
    config.validate();
    experiment.validate();
    const double gamma = experiment.params.gamma;
    if (q > 0 && !moment_exists(gamma, q))
        throw MomentDoesNotExist("moment does not exist: q >= 4/gamma^2");

    std::sort(s_values.begin(), s_values.end());
    std::vector<double> scales;
    for (double s : s_values) {
        if (s >= 4.0 * experiment.dt) scales.push_back(s);  // path-step floor
    }
    if (scales.size() < 2)
        throw ParameterError("clock scaling: not enough scales above the step floor");
    const double horizon = scales.back();

    LevelFieldSampler sampler(experiment.params, experiment.level, experiment.grid);
    const FieldStack quenched_stack =
        config.quenched ? sampler.sample(config.seed, 0) : FieldStack{};

    std::vector<std::size_t> indices;
    for (double s : scales)
        indices.push_back(static_cast<std::size_t>(std::llround(s / experiment.dt)));

    ReplicaTable table(scales.size(), config.replicas);
    parallel_for(config.replicas, [&](std::size_t rep) {
        const FieldStack stack =
            config.quenched ? quenched_stack : sampler.sample(config.seed, rep);
        const BrownianPath path = sample_path({0.0, 0.0}, horizon, experiment.dt,
                                              path_seed(config, rep));
        const PathClock clock = compute_clock(path, stack, experiment.level, gamma);
        if (clock.truncated_at && *clock.truncated_at < indices.back()) {
            table.failed[rep] = 1;
            return;
        }
        for (std::size_t s = 0; s < indices.size(); ++s) {
            table.values[s][rep] = std::pow(clock.values[indices[s]], q);
        }
    });

    ScalingEstimate result;
    result.failed_replicas = table.failure_count();
    result.points = table.reduce(scales);
    result.estimate = fit_points(result.points, config.replicas, config.seed);
    return result;
}

ScalingEstimate estimate_negative_moments(const MCConfig& config,
                                          const ClockExperiment& experiment,
                                          double q, std::vector<double> radii) {
    config.validate();
    experiment.validate();
    if (!(q > 0)) throw ParameterError("negative moments: q must be positive");
    const double gamma = experiment.params.gamma;

    std::sort(radii.begin(), radii.end());
    std::vector<double> scales;
    for (double r : radii) {
        if (0.5 * r * r >= 32.0 * experiment.dt) scales.push_back(r);
    }
    if (scales.size() < 2)
        throw ParameterError("negative moments: not enough radii above the step floor");
    const double r_max = scales.back();
    if (r_max > 0.45 * experiment.grid.extent)
        throw ParameterError("negative moments: largest radius does not fit the grid");
    // Exit from the largest ball is essentially certain by 20 r^2.
    const double horizon = 20.0 * r_max * r_max;

    LevelFieldSampler sampler(experiment.params, experiment.level, experiment.grid);
    const FieldStack quenched_stack =
        config.quenched ? sampler.sample(config.seed, 0) : FieldStack{};

    ReplicaTable table(scales.size(), config.replicas);
    parallel_for(config.replicas, [&](std::size_t rep) {
        const FieldStack stack =
            config.quenched ? quenched_stack : sampler.sample(config.seed, rep);
        const BrownianPath path = sample_path({0.0, 0.0}, horizon, experiment.dt,
                                              path_seed(config, rep));
        const PathClock clock = compute_clock(path, stack, experiment.level, gamma);

        std::size_t scale_idx = 0;
        for (std::size_t k = 0; k < path.positions.size() && scale_idx < scales.size();
             ++k) {
            if (clock.truncated_at && k >= *clock.truncated_at) break;
            const Point& p = path.positions[k];
            const double rr = p.x * p.x + p.y * p.y;
            while (scale_idx < scales.size() &&
                   rr >= scales[scale_idx] * scales[scale_idx]) {
                table.values[scale_idx][rep] =
                    std::pow(clock.values[k], -q);
                ++scale_idx;
            }
        }
        if (scale_idx < scales.size()) table.failed[rep] = 1;
    });

    ScalingEstimate result;
    result.failed_replicas = table.failure_count();
    result.points = table.reduce(scales);
    result.estimate = fit_points(result.points, config.replicas, config.seed);
    return result;
}

ScalingEstimate estimate_negative_moments_fixed_interval(
    const MCConfig& config, const ClockExperiment& experiment, double q,
    std::vector<double> t_values) {
    config.validate();
    experiment.validate();
    if (!(q > 0)) throw ParameterError("negative moments: q must be positive");
    const double gamma = experiment.params.gamma;

    std::sort(t_values.begin(), t_values.end());
    std::vector<double> scales;
    for (double t : t_values) {
        if (t >= 32.0 * experiment.dt) scales.push_back(t);
    }
    if (scales.size() < 2)
        throw ParameterError("negative moments: not enough times above the step floor");
    const double horizon = scales.back();

    LevelFieldSampler sampler(experiment.params, experiment.level, experiment.grid);
    std::vector<std::size_t> indices;
    for (double t : scales)
        indices.push_back(static_cast<std::size_t>(std::llround(t / experiment.dt)));

    ReplicaTable table(scales.size(), config.replicas);
    parallel_for(config.replicas, [&](std::size_t rep) {
        const FieldStack stack = sampler.sample(config.seed, rep);
        const BrownianPath path = sample_path({0.0, 0.0}, horizon, experiment.dt,
                                              path_seed(config, rep));
        const PathClock clock = compute_clock(path, stack, experiment.level, gamma);
        if (clock.truncated_at && *clock.truncated_at < indices.back()) {
            table.failed[rep] = 1;
            return;
        }
        for (std::size_t s = 0; s < indices.size(); ++s) {
            table.values[s][rep] = std::pow(clock.values[indices[s]], -q);
        }
    });

    ScalingEstimate result;
    result.failed_replicas = table.failure_count();
    result.points = table.reduce(scales);
    result.estimate = fit_points(result.points, config.replicas, config.seed);
    return result;
}

HolderEstimate estimate_holder(const MCConfig& config,
                               const ClockExperiment& experiment, double horizon,
                               int octaves) {
    config.validate();
    experiment.validate();
    if (octaves < 2) throw ParameterError("holder: need >= 2 octaves");
    const double gamma = experiment.params.gamma;

    std::vector<double> scales;
    for (int j = 1; j <= octaves; ++j) {
        const double s = horizon * std::ldexp(1.0, -j);
        if (s >= 4.0 * experiment.dt) scales.push_back(s);
    }
    std::sort(scales.begin(), scales.end());
    if (scales.size() < 2)
        throw ParameterError("holder: not enough scales above the step floor");

    LevelFieldSampler sampler(experiment.params, experiment.level, experiment.grid);

    std::vector<double> upper_slopes(config.replicas, 0.0);
    std::vector<double> lower_slopes(config.replicas, 0.0);
    std::vector<char> failed(config.replicas, 0);
    parallel_for(config.replicas, [&](std::size_t rep) {
        const FieldStack stack = sampler.sample(config.seed, rep);
        const BrownianPath path = sample_path({0.0, 0.0}, horizon, experiment.dt,
                                              path_seed(config, rep));
        const PathClock clock = compute_clock(path, stack, experiment.level, gamma);
        if (clock.truncated_at) {
            failed[rep] = 1;
            return;
        }
        std::vector<double> lx, ly_max, ly_min;
        for (double s : scales) {
            const auto window = static_cast<std::size_t>(std::llround(s / experiment.dt));
            double inc_max = 0.0;
            double inc_min = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k + window < clock.values.size(); k += window) {
                const double inc = clock.values[k + window] - clock.values[k];
                inc_max = std::max(inc_max, inc);
                inc_min = std::min(inc_min, inc);
            }
            lx.push_back(std::log(s));
            ly_max.push_back(std::log(inc_max));
            ly_min.push_back(std::log(inc_min));
        }
        upper_slopes[rep] = fit_line(lx, ly_max).slope;
        lower_slopes[rep] = fit_line(lx, ly_min).slope;
    });

    std::vector<double> up_ok, low_ok;
    for (std::size_t r = 0; r < config.replicas; ++r) {
        if (!failed[r]) {
            up_ok.push_back(upper_slopes[r]);
            low_ok.push_back(lower_slopes[r]);
        }
    }
    if (up_ok.size() < 2) throw ParameterError("holder: too many failed replicas");

    HolderEstimate out;
    const MeanStderr up = mean_stderr(up_ok);
    const MeanStderr low = mean_stderr(low_ok);
    for (ExponentEstimate* est : {&out.upper, &out.lower}) {
        est->scale_window = {scales.front(), scales.back()};
        est->replicas = up_ok.size();
        est->seed = config.seed;
    }
    out.upper.slope = up.mean;
    out.upper.stderr_of_slope = up.stderr_of_mean;
    out.lower.slope = low.mean;
    out.lower.stderr_of_slope = low.stderr_of_mean;
    out.per_replica_upper = std::move(up_ok);
    out.per_replica_lower = std::move(low_ok);
    return out;
}

ScalingEstimate independence_decay(const MCConfig& config,
                                   const ClockExperiment& experiment,
                                   const std::vector<int>& levels,
                                   double horizon) {
    config.validate();
    experiment.validate();
    if (levels.size() < 2)
        throw ParameterError("independence decay: need >= 2 levels");
    const double gamma = experiment.params.gamma;

    StackSampler sampler(experiment.params, experiment.grid);

    ReplicaTable table(levels.size(), config.replicas);
    parallel_for(config.replicas, [&](std::size_t rep) {
        const FieldStack stack = sampler.sample(config.seed, rep);
        const BrownianPath path = sample_path({0.0, 0.0}, horizon, experiment.dt,
                                              path_seed(config, rep));
        if (!experiment.grid.periodic) {
            for (const Point& p : path.positions) {
                if (!experiment.grid.contains(p)) {
                    table.failed[rep] = 1;
                    return;
                }
            }
        }
        const auto brackets = bracket_series(stack, gamma, levels, path);
        for (std::size_t l = 0; l < brackets.size(); ++l) {
            table.values[l][rep] = brackets[l].bracket_sup;
        }
    });

    // Scales are the c_n themselves; log-log slope is the per-octave decay
    // when the schedule is dyadic.
    std::vector<double> scales;
    for (int n : levels)
        scales.push_back(experiment.params.scale_schedule.at(n - 1));

    ScalingEstimate result;
    result.failed_replicas = table.failure_count();
    result.points = table.reduce(scales);
    result.estimate = fit_points(result.points, config.replicas, config.seed);
    return result;
}

// ---------------------------------------------------------------------------
// Kahane comparison.

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != n)
            throw ParameterError("kahane: gram matrix is not square");
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    if (!m.isApprox(m.transpose(), 1e-12))
        throw ParameterError("kahane: gram matrix is not symmetric");
    return m;
}

// Factor A with A A^T ~ gram; small negative eigenvalues are clipped,
// anything worse is rejected.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& gram) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw ParameterError("kahane: eigensolver failed");
    const double tolerance = 1e-9 * std::max(gram.trace(), 1.0);
    if (eig.eigenvalues().minCoeff() < -tolerance)
        throw ParameterError("kahane: gram matrix is not positive semidefinite");
    return eig.eigenvectors() *
           eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void validate_test_function(const ConvexTestFunction& f,
                            const std::vector<double>& args) {
    GaussianRng rng(0x5eed);
    for (double s : args) {
        const double v = f.fn(s);
        const double bound = f.bound_m * (1.0 + std::pow(s, f.bound_beta));
        if (!(std::abs(v) <= bound * (1.0 + 1e-9) + 1e-12))
            throw ParameterError("kahane: rejected test function (growth bound)");
    }
    // Midpoint convexity on random pairs of sampled arguments.
    for (int trial = 0; trial < 256 && args.size() >= 2; ++trial) {
        const double a = args[rng.bits() % args.size()];
        const double b = args[rng.bits() % args.size()];
        const double mid = f.fn(0.5 * (a + b));
        const double chord = 0.5 * (f.fn(a) + f.fn(b));
        const double scale = std::max({std::abs(mid), std::abs(chord), 1.0});
        if (mid > chord + 1e-9 * scale)
            throw ParameterError("kahane: rejected test function (not convex)");
    }
}

}  // namespace

KahaneCheckResult kahane_check(const std::vector<double>& weights,
                               const std::vector<std::vector<double>>& gram,
                               const std::vector<std::vector<double>>& gram_upper,
                               double shift, const ConvexTestFunction& f,
                               const MCConfig& config) {
    config.validate();
    if (shift < 0) throw ParameterError("kahane: shift must be >= 0");
    const Eigen::MatrixXd k_lo = to_matrix(gram);
    const Eigen::MatrixXd k_hi = to_matrix(gram_upper);
    const auto n = static_cast<Eigen::Index>(weights.size());
    if (k_lo.rows() != n || k_hi.rows() != n)
        throw ParameterError("kahane: weights and gram sizes differ");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (k_lo(i, j) > k_hi(i, j) + shift + 1e-12)
                throw ParameterError("kahane: ordering K <= K' + C violated");
        }
    }

    const Eigen::MatrixXd a_lo = psd_factor(k_lo);
    const Eigen::MatrixXd a_hi = psd_factor(k_hi);
    // Normalize by the variance the factor actually realizes.
    const Eigen::VectorXd var_lo = a_lo.rowwise().squaredNorm();
    const Eigen::VectorXd var_hi = a_hi.rowwise().squaredNorm();

    const std::uint64_t samples = config.replicas;
    std::vector<double> lhs(samples), rhs(samples);
    parallel_for(samples, [&](std::size_t rep) {
        GaussianRng rng(derive_stream(config.seed, rep, 7001));
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
        // Common noise for both sides sharpens the paired comparison.
        const Eigen::VectorXd y_lo = a_lo * z;
        const Eigen::VectorXd y_hi = a_hi * z;
        double s_lo = 0.0, s_hi = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            s_lo += weights[i] * std::exp(y_lo(i) - 0.5 * var_lo(i));
            s_hi += weights[i] * std::exp(y_hi(i) - 0.5 * var_hi(i));
        }
        if (shift > 0) {
            const double zc = rng.normal();
            s_hi *= std::exp(std::sqrt(shift) * zc - 0.5 * shift);
        }
        lhs[rep] = s_lo;
        rhs[rep] = s_hi;
    });

    std::vector<double> args = lhs;
    args.insert(args.end(), rhs.begin(), rhs.end());
    validate_test_function(f, args);

    std::vector<double> f_lhs(samples), f_rhs(samples), diff(samples);
    for (std::uint64_t i = 0; i < samples; ++i) {
        f_lhs[i] = f.fn(lhs[i]);
        f_rhs[i] = f.fn(rhs[i]);
        diff[i] = f_rhs[i] - f_lhs[i];
    }
    const MeanStderr ml = mean_stderr(f_lhs);
    const MeanStderr mr = mean_stderr(f_rhs);
    const MeanStderr md = mean_stderr(diff);

    KahaneCheckResult result;
    result.lhs_mean = ml.mean;
    result.lhs_stderr = ml.stderr_of_mean;
    result.rhs_mean = mr.mean;
    result.rhs_stderr = mr.stderr_of_mean;
    result.pass = md.mean >= -3.0 * md.stderr_of_mean;
    return result;
}

}  // namespace liouville
