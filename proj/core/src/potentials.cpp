#include "liouville/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "liouville/kernels.hpp"
#include "liouville/parallel.hpp"
#include "liouville/stats.hpp"

namespace liouville {

namespace {

void require_radius_fits(const GridSpec& grid, double radius) {
    if (!(radius > 0)) throw ParameterError("potential: radius must be positive");
    if (radius > 0.5 * grid.extent + 1e-12)
        throw DomainError("potential: ball radius exceeds the grid extent");
}

// Cell nodes inside the ball, precomputed once per sweep.
struct BallCells {
    std::vector<int> is;
    std::vector<int> js;
    std::vector<Point> nodes;
};

BallCells cells_in_ball(const GridSpec& grid, double radius) {
    BallCells cells;
    const double r2 = radius * radius;
    for (int i = 0; i < grid.resolution; ++i) {
        const double x = grid.node_coord(i);
        if (x * x > r2) continue;
        for (int j = 0; j < grid.resolution; ++j) {
            const double y = grid.node_coord(j);
            if (x * x + y * y <= r2) {
                cells.is.push_back(i);
                cells.js.push_back(j);
                cells.nodes.push_back({x, y});
            }
        }
    }
    return cells;
}

// Staggered 4x4 sub-quadrature of the Green function over the cell around
// `node`. Sub-points outside the ball or coinciding with the evaluation
// point carry no mass and are skipped.
double self_cell_green(double radius, const Point& x, const Point& node,
                       double spacing) {
    double sum = 0.0;
    int used = 0;
    const double guard = 1e-9 * spacing;
    for (int a = 0; a < 4; ++a) {
        const double ox = ((a + 0.5) / 4.0 - 0.5) * spacing;
        for (int b = 0; b < 4; ++b) {
            const double oy = ((b + 0.5) / 4.0 - 0.5) * spacing;
            const Point y{node.x + ox, node.y + oy};
            if (y.x * y.x + y.y * y.y > radius * radius) continue;
            if (distance(x, y) < guard) continue;
            sum += eval_disk_green(radius, x, y);
            ++used;
        }
    }
    return used > 0 ? sum / used : 0.0;
}

}  // namespace

double PotentialGrid::sup() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, v);
    return s;
}

std::vector<Point> ball_eval_points(double radius, int lattice_resolution) {
    if (lattice_resolution < 2)
        throw ParameterError("potential: lattice resolution must be >= 2");
    std::vector<Point> pts;
    const double h = 2.0 * radius / (lattice_resolution - 1);
    for (int i = 0; i < lattice_resolution; ++i) {
        for (int j = 0; j < lattice_resolution; ++j) {
            Point p{-radius + i * h, -radius + j * h};
            if (p.x * p.x + p.y * p.y <= radius * radius) pts.push_back(p);
        }
    }
    return pts;
}

namespace {

double potential_at(const ChaosMeasureGrid& measure, const BallCells& cells,
                    double radius, const Point& x) {
    const double h = measure.grid.spacing();
    const double half_h = 0.5 * h;
    KahanSum sum;
    for (std::size_t c = 0; c < cells.nodes.size(); ++c) {
        const Point& node = cells.nodes[c];
        const double mass = measure.cell_mass.at(cells.is[c], cells.js[c]);
        if (mass == 0.0) continue;
        const bool self = std::abs(x.x - node.x) <= half_h &&
                          std::abs(x.y - node.y) <= half_h;
        const double green = self ? self_cell_green(radius, x, node, h)
                                  : eval_disk_green(radius, x, node);
        sum.add(green * mass);
    }
    return sum.value();
}

}  // namespace

PotentialGrid potential(const ChaosMeasureGrid& measure, double radius,
                        const std::vector<Point>& eval_points) {
    require_radius_fits(measure.grid, radius);
    const BallCells cells = cells_in_ball(measure.grid, radius);

    PotentialGrid out;
    out.radius = radius;
    out.eval_points = eval_points;
    out.values.resize(eval_points.size());
    parallel_for(eval_points.size(), [&](std::size_t k) {
        out.values[k] = potential_at(measure, cells, radius, eval_points[k]);
    });
    return out;
}

double measure_distance(const ChaosMeasureGrid& mu, const ChaosMeasureGrid& nu,
                        double radius, const std::vector<Point>& eval_points) {
    const PotentialGrid pm = potential(mu, radius, eval_points);
    const PotentialGrid pn = potential(nu, radius, eval_points);
    double sup = 0.0;
    for (std::size_t k = 0; k < pm.values.size(); ++k) {
        sup = std::max(sup, std::abs(pm.values[k] - pn.values[k]));
    }
    return sup;
}

LevelPotentialDiagnostics potential_convergence(const FieldStack& stack,
                                                double gamma,
                                                const std::vector<int>& levels,
                                                double radius,
                                                const std::vector<Point>& eval_points) {
    if (levels.size() < 2)
        throw ParameterError("potential convergence: need at least two levels");
    require_radius_fits(stack.grid, radius);

    std::vector<ChaosMeasureGrid> measures;
    measures.reserve(levels.size());
    for (int n : levels) measures.push_back(build_measure(stack, n, gamma));

    const BallCells cells = cells_in_ball(stack.grid, radius);
    const std::size_t n_levels = levels.size();
    const double h = stack.grid.spacing();
    const double half_h = 0.5 * h;

    // potentials[l][k]: level l potential at eval point k. One Green sweep
    // feeds every level.
    std::vector<std::vector<double>> potentials(
        n_levels, std::vector<double>(eval_points.size(), 0.0));
    parallel_for(eval_points.size(), [&](std::size_t k) {
        const Point& x = eval_points[k];
        std::vector<KahanSum> sums(n_levels);
        for (std::size_t c = 0; c < cells.nodes.size(); ++c) {
            const Point& node = cells.nodes[c];
            const bool self = std::abs(x.x - node.x) <= half_h &&
                              std::abs(x.y - node.y) <= half_h;
            const double green = self ? self_cell_green(radius, x, node, h)
                                      : eval_disk_green(radius, x, node);
            for (std::size_t l = 0; l < n_levels; ++l) {
                sums[l].add(green * measures[l].cell_mass.at(cells.is[c], cells.js[c]));
            }
        }
        for (std::size_t l = 0; l < n_levels; ++l) potentials[l][k] = sums[l].value();
    });

    LevelPotentialDiagnostics diag;
    diag.levels = levels;
    diag.sup_potential.resize(n_levels, 0.0);
    diag.distance_to_top.resize(n_levels, 0.0);
    const auto& top = potentials.back();
    for (std::size_t l = 0; l < n_levels; ++l) {
        double sup_pot = 0.0, dist = 0.0;
        for (std::size_t k = 0; k < eval_points.size(); ++k) {
            sup_pot = std::max(sup_pot, potentials[l][k]);
            dist = std::max(dist, std::abs(potentials[l][k] - top[k]));
        }
        diag.sup_potential[l] = sup_pot;
        diag.distance_to_top[l] = dist;
    }
    return diag;
}

// ---------------------------------------------------------------------------
// Clock stability.

namespace {

double density_at(const ChaosMeasureGrid& measure, const Point& p) {
    const GridSpec& grid = measure.grid;
    const double h = grid.spacing();
    const double half = 0.5 * grid.extent;
    int i = static_cast<int>(std::floor((p.x + half) / h + 0.5));
    int j = static_cast<int>(std::floor((p.y + half) / h + 0.5));
    i = std::clamp(i, 0, grid.resolution - 1);
    j = std::clamp(j, 0, grid.resolution - 1);
    return measure.cell_mass.at(i, j) / measure.cell_area();
}

}  // namespace

ClockStabilityDiagnostic clock_stability_vs_distance(
    const std::vector<BrownianPath>& paths, const ChaosMeasureGrid& mu,
    const ChaosMeasureGrid& nu, double radius,
    const std::vector<Point>& eval_points, std::vector<double> eta_grid) {
    if (paths.empty()) throw ParameterError("clock stability: no paths");

    ClockStabilityDiagnostic diag;
    const PotentialGrid pm = potential(mu, radius, eval_points);
    const PotentialGrid pn = potential(nu, radius, eval_points);
    diag.sup_potential_mu = pm.sup();
    diag.sup_potential_nu = pn.sup();
    double dist = 0.0;
    for (std::size_t k = 0; k < pm.values.size(); ++k) {
        dist = std::max(dist, std::abs(pm.values[k] - pn.values[k]));
    }
    diag.distance = dist;
    if (dist > 1.0)
        throw ParameterError("clock stability: requires d_R(mu, nu) <= 1");

    // sup_t |F_mu(t) - F_nu(t)| per path, with both clocks stopped at the
    // first exit from the ball.
    std::vector<double> sups(paths.size(), 0.0);
    parallel_for(paths.size(), [&](std::size_t pi) {
        const BrownianPath& path = paths[pi];
        const auto exit = first_exit_index(path, radius);
        const std::size_t stop = exit ? *exit : path.positions.size() - 1;
        KahanSum fm, fn;
        double sup = 0.0;
        for (std::size_t k = 0; k < stop; ++k) {
            fm.add(density_at(mu, path.positions[k]) * path.dt);
            fn.add(density_at(nu, path.positions[k]) * path.dt);
            sup = std::max(sup, std::abs(fm.value() - fn.value()));
        }
        sups[pi] = sup;
    });

    if (eta_grid.empty()) {
        double sup_all = 0.0;
        for (double s : sups) sup_all = std::max(sup_all, s);
        if (sup_all <= 0) sup_all = 1e-12;
        for (int k = 6; k >= 0; --k) eta_grid.push_back(sup_all / (1 << k));
        std::sort(eta_grid.begin(), eta_grid.end());
    }

    diag.eta = eta_grid;
    diag.exceedance.resize(eta_grid.size());
    for (std::size_t e = 0; e < eta_grid.size(); ++e) {
        std::size_t count = 0;
        for (double s : sups) {
            if (s >= eta_grid[e]) ++count;
        }
        diag.exceedance[e] =
            static_cast<double>(count) / static_cast<double>(sups.size());
    }

    // Smallest c with p_i <= c exp(-eta_i / (c sqrt(d))) for all i; the
    // right side is increasing in c, so bisect.
    const double sqrt_d = std::sqrt(std::max(dist, 1e-300));
    auto dominated_by = [&](double c) {
        for (std::size_t e = 0; e < diag.eta.size(); ++e) {
            if (diag.exceedance[e] > c * std::exp(-diag.eta[e] / (c * sqrt_d)))
                return false;
        }
        return true;
    };
    double lo = 1e-6, hi = 1.0;
    while (!dominated_by(hi) && hi < 1e12) hi *= 2.0;
    diag.dominated = dominated_by(hi);
    if (diag.dominated) {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            (dominated_by(mid) ? hi : lo) = mid;
        }
        diag.fitted_constant = hi;
    }
    return diag;
}

}  // namespace liouville
