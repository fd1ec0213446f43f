#include "liouville/chaos_measure.hpp"

#include <algorithm>
#include <cmath>

#include "liouville/parallel.hpp"
#include "liouville/rng.hpp"
#include "liouville/stats.hpp"

namespace liouville {

double ChaosMeasureGrid::total_mass() const {
    return pairwise_sum(cell_mass.data());
}

Grid2D chaos_density(const Grid2D& field, double gamma, double variance) {
    if (!(gamma >= 0.0 && gamma < 2.0))
        throw ParameterError("measure: gamma must lie in [0, 2)");
    Grid2D density(field.resolution());
    const double shift = 0.5 * gamma * gamma * variance;
    const auto& src = field.data();
    auto& dst = density.data();
    for (std::size_t k = 0; k < src.size(); ++k) {
        dst[k] = std::exp(gamma * src[k] - shift);
    }
    return density;
}

ChaosMeasureGrid build_measure(const FieldStack& stack, int n, double gamma) {
    const int idx = stack.index_of_level(n);
    ChaosMeasureGrid measure;
    measure.grid = stack.grid;
    measure.level = n;
    measure.gamma = gamma;
    measure.cell_mass =
        chaos_density(stack.partial_sums[idx], gamma, stack.level_variance(n));
    const double area = measure.cell_area();
    for (double& m : measure.cell_mass.data()) m *= area;
    return measure;
}

namespace {

double torus_delta(double d, double extent, bool periodic) {
    if (!periodic) return d;
    d = std::remainder(d, extent);
    return d;
}

}  // namespace

double ball_mass(const ChaosMeasureGrid& measure, const Point& center, double r) {
    if (!(r >= 0)) throw ParameterError("ball mass: negative radius");
    const GridSpec& grid = measure.grid;
    const int res = grid.resolution;
    const double h = grid.spacing();
    const double r2 = r * r;

    // Restrict the scan to the bounding box of the ball. A ball that wraps
    // around a periodic boundary falls back to the full grid.
    const double half = 0.5 * grid.extent;
    int i_lo = static_cast<int>(std::floor((center.x - r + half) / h)) - 1;
    int i_hi = static_cast<int>(std::ceil((center.x + r + half) / h)) + 1;
    int j_lo = static_cast<int>(std::floor((center.y - r + half) / h)) - 1;
    int j_hi = static_cast<int>(std::ceil((center.y + r + half) / h)) + 1;
    if (i_lo < 0 || j_lo < 0 || i_hi > res - 1 || j_hi > res - 1) {
        i_lo = 0;
        j_lo = 0;
        i_hi = res - 1;
        j_hi = res - 1;
    }

    KahanSum sum;
    for (int i = i_lo; i <= i_hi; ++i) {
        const double dx = torus_delta(grid.node_coord(i) - center.x, grid.extent,
                                      grid.periodic);
        const double dx2 = dx * dx;
        if (dx2 > r2) continue;
        for (int j = j_lo; j <= j_hi; ++j) {
            const double dy = torus_delta(grid.node_coord(j) - center.y,
                                          grid.extent, grid.periodic);
            if (dx2 + dy * dy <= r2) sum.add(measure.cell_mass.at(i, j));
        }
    }
    return sum.value();
}

double square_mass(const ChaosMeasureGrid& measure, const Point& corner,
                   double side) {
    if (!(side > 0)) throw ParameterError("square mass: side must be positive");
    const GridSpec& grid = measure.grid;
    const double h = grid.spacing();
    const double half = 0.5 * grid.extent;
    const int res = grid.resolution;

    const int i_lo = std::max(0, static_cast<int>(std::ceil((corner.x + half) / h - 1e-9)));
    const int j_lo = std::max(0, static_cast<int>(std::ceil((corner.y + half) / h - 1e-9)));
    const int i_hi = std::min(res - 1, static_cast<int>(std::floor((corner.x + side + half) / h - 1e-9)));
    const int j_hi = std::min(res - 1, static_cast<int>(std::floor((corner.y + side + half) / h - 1e-9)));

    KahanSum sum;
    for (int i = i_lo; i <= i_hi; ++i) {
        for (int j = j_lo; j <= j_hi; ++j) {
            sum.add(measure.cell_mass.at(i, j));
        }
    }
    return sum.value();
}

BallMassProfile ball_mass_profile(const ChaosMeasureGrid& measure,
                                  const Point& center,
                                  std::vector<double> radii) {
    std::sort(radii.begin(), radii.end(), std::greater<double>());
    BallMassProfile profile;
    profile.center = center;
    profile.radii = radii;
    profile.masses.reserve(radii.size());
    for (double r : radii) profile.masses.push_back(ball_mass(measure, center, r));
    return profile;
}

// ---------------------------------------------------------------------------
// Estimators.

namespace {

std::vector<double> usable_radii(std::vector<double> radii, double spacing) {
    std::sort(radii.begin(), radii.end());
    std::vector<double> kept;
    for (double r : radii) {
        if (r >= 4.0 * spacing) kept.push_back(r);  // discretization floor
    }
    return kept;
}

ExponentEstimate fit_scaling(const std::vector<ScalePoint>& points,
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
    if (x.size() < 2) throw ParameterError("scaling fit: fewer than two usable scales");
    const bool weighted = std::all_of(sigma.begin(), sigma.end(),
                                      [](double s) { return s > 0; });
    LineFit fit = weighted ? fit_line(x, y, sigma) : fit_line(x, y);
    ExponentEstimate est;
    est.slope = fit.slope;
    est.stderr_of_slope = fit.slope_stderr;
    est.r_squared = fit.r_squared;
    est.scale_window = {std::exp(x.front()), std::exp(x.back())};
    est.replicas = replicas;
    est.seed = seed;
    return est;
}

}  // namespace

ScalingEstimate estimate_moment_scaling(const MeasureEnsemble& ensemble,
                                        std::uint64_t replicas, double p,
                                        std::vector<double> radii,
                                        std::uint64_t seed) {
    if (replicas < 2) throw ParameterError("moment scaling: need >= 2 replicas");
    ChaosMeasureGrid first = ensemble(0);
    if (!moment_exists(first.gamma, p))
        throw MomentDoesNotExist("moment does not exist: p >= 4/gamma^2");
    radii = usable_radii(std::move(radii), first.grid.spacing());
    if (radii.size() < 2)
        throw ParameterError("moment scaling: not enough radii above the grid floor");

    const std::size_t n_r = radii.size();
    std::vector<std::vector<double>> powers(n_r,
                                            std::vector<double>(replicas, 0.0));
    auto accumulate = [&](const ChaosMeasureGrid& measure, std::uint64_t rep) {
        for (std::size_t k = 0; k < n_r; ++k) {
            const double m = ball_mass(measure, Point{0.0, 0.0}, radii[k]);
            powers[k][rep] = std::pow(m, p);
        }
    };

    accumulate(first, 0);
    parallel_for(replicas - 1, [&](std::size_t i) {
        const std::uint64_t rep = i + 1;
        accumulate(ensemble(rep), rep);
    });

    ScalingEstimate result;
    for (std::size_t k = 0; k < n_r; ++k) {
        const MeanStderr ms = mean_stderr(powers[k]);
        result.points.push_back({radii[k], ms.mean, ms.stderr_of_mean});
    }
    result.estimate = fit_scaling(result.points, replicas, seed);
    return result;
}

ScalingEstimate estimate_moment_scaling(const std::vector<ChaosMeasureGrid>& measures,
                                        double p, std::vector<double> radii) {
    if (measures.size() < 2) throw ParameterError("moment scaling: need >= 2 replicas");
    return estimate_moment_scaling(
        [&measures](std::uint64_t rep) { return measures[rep]; },
        measures.size(), p, std::move(radii));
}

ScalingEstimate estimate_modulus(const ChaosMeasureGrid& measure,
                                 std::vector<double> radii, int center_stride) {
    radii = usable_radii(std::move(radii), measure.grid.spacing());
    if (radii.size() < 2)
        throw ParameterError("modulus: not enough radii above the grid floor");
    const double r_max = radii.back();
    const GridSpec& grid = measure.grid;
    const int res = grid.resolution;

    // Centers on a sublattice, kept away from the boundary on open grids.
    std::vector<Point> centers;
    for (int i = 0; i < res; i += center_stride) {
        for (int j = 0; j < res; j += center_stride) {
            Point c{grid.node_coord(i), grid.node_coord(j)};
            if (!grid.periodic) {
                const double half = 0.5 * grid.extent;
                if (std::abs(c.x) > half - r_max || std::abs(c.y) > half - r_max)
                    continue;
            }
            centers.push_back(c);
        }
    }
    if (centers.empty()) throw ParameterError("modulus: no admissible centers");

    ScalingEstimate result;
    for (double r : radii) {
        double sup = 0.0;
        for (const Point& c : centers) sup = std::max(sup, ball_mass(measure, c, r));
        result.points.push_back({r, sup, 0.0});
    }
    result.estimate = fit_scaling(result.points, 1, measure.grid.resolution);
    return result;
}

// ---------------------------------------------------------------------------
// Exact scale invariance.

namespace {

struct SliceEnsembleMoments {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

// E[M(A)^p] for the measure of the white-noise slice at the given cutoff,
// with A the centered square of the given side.
SliceEnsembleMoments slice_square_moment(double gamma, double p, double eps,
                                         double side, const GridSpec& grid,
                                         std::uint64_t replicas,
                                         std::uint64_t seed,
                                         std::uint64_t purpose) {
    KernelSpec kernel = KernelSpec::wn_slice_kernel(eps, eps);
    StationaryFieldSampler sampler(kernel, grid);
    const double variance = *kernel.value_at_zero();
    const double area = grid.spacing() * grid.spacing();

    std::vector<double> values(replicas, 0.0);
    parallel_for(replicas, [&](std::size_t rep) {
        Grid2D field = sampler.sample(derive_stream(seed, rep, purpose));
        Grid2D density = chaos_density(field, gamma, variance);
        ChaosMeasureGrid measure{grid, 0, gamma, std::move(density)};
        for (double& m : measure.cell_mass.data()) m *= area;
        const double mass =
            square_mass(measure, Point{-0.5 * side, -0.5 * side}, side);
        values[rep] = std::pow(mass, p);
    });
    const MeanStderr ms = mean_stderr(values);
    return {ms.mean, ms.stderr_of_mean};
}

}  // namespace

ScalingRelationCheck check_scaling_relation(double gamma, double lambda, double p,
                                            const ScalingRelationSettings& settings) {
    if (!(lambda > 0 && lambda <= 1))
        throw ParameterError("scaling relation: lambda must lie in (0, 1]");
    if (!moment_exists(gamma, p))
        throw MomentDoesNotExist("moment does not exist: p >= 4/gamma^2");

    // Matched cutoffs: the lambda-scaled square is measured at cutoff
    // lambda * eps on the lambda-scaled grid, so both sides see the same
    // number of cells.
    GridSpec small_grid = settings.grid;
    small_grid.extent = settings.grid.extent * lambda;

    const auto base =
        slice_square_moment(gamma, p, settings.eps, settings.square_side,
                            settings.grid, settings.replicas, settings.seed, 11);
    const auto scaled = slice_square_moment(
        gamma, p, settings.eps * lambda, settings.square_side * lambda,
        small_grid, settings.replicas, settings.seed, 12);

    ScalingRelationCheck check;
    check.lhs = scaled.mean;
    check.rhs = std::pow(lambda, measure_spectrum_exponent(gamma, p)) * base.mean;
    check.ratio = check.lhs / check.rhs;
    const double rel_lhs = scaled.stderr_of_mean / scaled.mean;
    const double rel_rhs = base.stderr_of_mean / base.mean;
    check.sigma = check.ratio * std::sqrt(rel_lhs * rel_lhs + rel_rhs * rel_rhs);
    check.pass = std::abs(check.ratio - 1.0) <= 3.0 * check.sigma;
    return check;
}

void MCConfig::validate() const {
    if (replicas < 2) throw ParameterError("mc: replicas must be >= 2");
    if (!(confidence > 0 && confidence < 1))
        throw ParameterError("mc: confidence must lie in (0, 1)");
}

}  // namespace liouville
