#pragma once

#include <vector>

#include "liouville/brownian.hpp"
#include "liouville/chaos_measure.hpp"
#include "liouville/grid.hpp"

namespace liouville {

/// Values of the ball potential of a measure on a set of evaluation points
/// inside the closed ball B(0, R).
struct PotentialGrid {
    double radius = 0.0;
    std::vector<Point> eval_points;
    std::vector<double> values;

    double sup() const;
};

/// Square lattice of evaluation points clipped to the closed ball B(0, R).
std::vector<Point> ball_eval_points(double radius, int lattice_resolution);

/// Potential of a measure against the Dirichlet Green function of B(0, R):
/// cell-midpoint quadrature over the cells whose node lies in the ball. The
/// cell containing the evaluation point is integrated with a staggered 4x4
/// sub-quadrature since its midpoint value would be singular.
PotentialGrid potential(const ChaosMeasureGrid& measure, double radius,
                        const std::vector<Point>& eval_points);

/// Sup distance between the potentials of two measures over the evaluation
/// points. A sup-norm metric: symmetric, zero on the diagonal, triangular.
double measure_distance(const ChaosMeasureGrid& mu, const ChaosMeasureGrid& nu,
                        double radius, const std::vector<Point>& eval_points);

/// Potentials of the level measures of one stack plus their sup distances to
/// the deepest requested level, sharing one Green-function sweep. Returns
/// one entry per level in `levels` (the last is the reference level).
struct LevelPotentialDiagnostics {
    std::vector<int> levels;
    std::vector<double> sup_potential;      // per level
    std::vector<double> distance_to_top;    // per level, 0 for the reference
};

LevelPotentialDiagnostics potential_convergence(const FieldStack& stack,
                                                double gamma,
                                                const std::vector<int>& levels,
                                                double radius,
                                                const std::vector<Point>& eval_points);

/// Empirical tail of sup_t |F_mu - F_nu| over a set of paths, tabulated
/// against thresholds, with the smallest constant c for which the bound
/// c * exp(-eta / (c sqrt(d_R))) dominates every tabulated point.
struct ClockStabilityDiagnostic {
    double distance = 0.0;       // d_R(mu, nu)
    double sup_potential_mu = 0.0;
    double sup_potential_nu = 0.0;
    std::vector<double> eta;
    std::vector<double> exceedance;  // P(sup_t |F_mu - F_nu| >= eta)
    double fitted_constant = 0.0;
    bool dominated = false;
};

/// Clocks here integrate the piecewise-constant cell density of each measure
/// along paths stopped at the boundary of B(0, R). Requires d_R(mu,nu) <= 1.
ClockStabilityDiagnostic clock_stability_vs_distance(
    const std::vector<BrownianPath>& paths, const ChaosMeasureGrid& mu,
    const ChaosMeasureGrid& nu, double radius,
    const std::vector<Point>& eval_points, std::vector<double> eta_grid = {});

}  // namespace liouville
