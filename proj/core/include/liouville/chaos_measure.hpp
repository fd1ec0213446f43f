#pragma once

#include <functional>
#include <vector>

#include "liouville/exponent.hpp"
#include "liouville/field_sampler.hpp"
#include "liouville/grid.hpp"

namespace liouville {

/// Thrown when a requested moment order is at or above the existence bound.
class MomentDoesNotExist : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Cell masses of a regularized chaos measure. Cells are the Voronoi squares
/// of the grid nodes; masses carry units of area.
struct ChaosMeasureGrid {
    GridSpec grid;
    int level = 0;
    double gamma = 0.0;
    Grid2D cell_mass;

    double cell_area() const {
        const double h = grid.spacing();
        return h * h;
    }
    double total_mass() const;
};

/// Density weights exp(gamma X - (gamma^2/2) variance) for a centered field
/// sample with the given pointwise variance. The subtraction happens in log
/// space before the exponential.
Grid2D chaos_density(const Grid2D& field, double gamma, double variance);

/// The level-n regularized measure of a field stack: cell mass equals the
/// normalized density at the node times the cell area. gamma = 0 yields
/// Lebesgue cell masses exactly.
ChaosMeasureGrid build_measure(const FieldStack& stack, int n, double gamma);

/// Mass of the (Euclidean) ball B(center, r): sum of the masses of cells
/// whose node lies in the ball. Periodic grids use torus distances.
double ball_mass(const ChaosMeasureGrid& measure, const Point& center, double r);

/// Mass of the axis-aligned square [x0, x0+side) x [y0, y0+side).
double square_mass(const ChaosMeasureGrid& measure, const Point& corner,
                   double side);

struct BallMassProfile {
    Point center;
    std::vector<double> radii;   // decreasing
    std::vector<double> masses;  // nondecreasing in radius
};

BallMassProfile ball_mass_profile(const ChaosMeasureGrid& measure,
                                  const Point& center,
                                  std::vector<double> radii);

// ---------------------------------------------------------------------------
// Multifractal estimators.

using MeasureEnsemble = std::function<ChaosMeasureGrid(std::uint64_t replica)>;

/// Regresses log E[M(B(0,r))^p] on log r over the given dyadic radii.
/// Radii under four grid cells are dropped before the fit. Throws
/// MomentDoesNotExist for p >= 4/gamma^2.
ScalingEstimate estimate_moment_scaling(const MeasureEnsemble& ensemble,
                                        std::uint64_t replicas, double p,
                                        std::vector<double> radii,
                                        std::uint64_t seed = 0);

/// Convenience overload for a materialized ensemble.
ScalingEstimate estimate_moment_scaling(const std::vector<ChaosMeasureGrid>& measures,
                                        double p, std::vector<double> radii);

/// Regresses the log of sup_x M(B(x, r)) over a lattice of centers against
/// log r on one measure. The slope lower-bounds the ball-mass modulus.
ScalingEstimate estimate_modulus(const ChaosMeasureGrid& measure,
                                 std::vector<double> radii,
                                 int center_stride = 8);

// ---------------------------------------------------------------------------
// Exact scaling relation of the scale-invariant kernel.

struct ScalingRelationSettings {
    double eps = 0.25;       // base white-noise cutoff
    double square_side = 1.0;
    GridSpec grid{2.0, 256, true};
    std::uint64_t replicas = 512;
    std::uint64_t seed = 1;
};

struct ScalingRelationCheck {
    double ratio = 1.0;  // E[M(lambda A)^p] / (lambda^xi E[M(A)^p])
    double sigma = 0.0;  // combined standard error of the ratio
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

/// Compares E[M(lambda A)^p] with lambda^{xi_M(p)} E[M(A)^p] for measures
/// built from the white-noise slices of the exactly scale-invariant kernel,
/// at matched cutoffs (eps and lambda*eps). Passes within three combined
/// standard errors.
ScalingRelationCheck check_scaling_relation(double gamma, double lambda, double p,
                                            const ScalingRelationSettings& settings);

}  // namespace liouville
