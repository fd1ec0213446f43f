#pragma once

#include <functional>
#include <vector>

#include "liouville/clock.hpp"
#include "liouville/exponent.hpp"
#include "liouville/field_sampler.hpp"

namespace liouville {

/// Geometry shared by the clock-based Monte Carlo estimators: the field
/// parameters, the level the clock runs at, the grid the field lives on,
/// and the path resolution. Paths start at the origin.
struct ClockExperiment {
    SimulationParams params;
    int level = 1;
    GridSpec grid{2.0, 256, true};
    double dt = 1e-4;

    void validate() const;
};

/// Regresses log E[F(s)^q] on log s over the given dyadic s values. Scales
/// under four path steps are dropped. Annealed by default; quenched mode
/// fixes the field of replica 0 and redraws only paths.
/// Throws MomentDoesNotExist for q >= 4/gamma^2 before any computation.
ScalingEstimate estimate_clock_scaling(const MCConfig& config,
                                       const ClockExperiment& experiment,
                                       double q, std::vector<double> s_values);

/// Regresses log E[F(T_r)^{-q}] on log r, with T_r the exit time of the
/// ball B(0, r). The fitted slope is one-sidedly bounded below by
/// 2 xi(-q). Radii whose mean exit time falls under 32 path steps are
/// dropped.
ScalingEstimate estimate_negative_moments(const MCConfig& config,
                                          const ClockExperiment& experiment,
                                          double q, std::vector<double> radii);

/// Fixed-interval variant: log E[F(t)^{-q}] against log t, slope bounded
/// below by xi(-q).
ScalingEstimate estimate_negative_moments_fixed_interval(
    const MCConfig& config, const ClockExperiment& experiment, double q,
    std::vector<double> t_values);

/// Envelope exponents of clock increments over dyadic scales: per replica,
/// the slopes of log max / log min increment against log scale, aggregated
/// across replicas. upper.slope >= alpha - eps and lower.slope <= beta + eps
/// are the expected relations.
struct HolderEstimate {
    ExponentEstimate upper;  // from dyadic increment maxima
    ExponentEstimate lower;  // from dyadic increment minima
    std::vector<double> per_replica_upper;
    std::vector<double> per_replica_lower;
};

HolderEstimate estimate_holder(const MCConfig& config,
                               const ClockExperiment& experiment,
                               double horizon, int octaves);

/// Decay of E[sup_t |cross bracket at level n|] against ln c_n over the
/// given levels; the slope recovers -gamma^2/8. The returned points carry
/// log2(c_n) as the scale, so the fitted slope is per octave.
ScalingEstimate independence_decay(const MCConfig& config,
                                   const ClockExperiment& experiment,
                                   const std::vector<int>& levels,
                                   double horizon);

// ---------------------------------------------------------------------------
// Convexity-comparison check on finite Gaussian vectors.

/// Convex test function with its declared polynomial growth bound
/// |F(x)| <= M (1 + x^beta) on the positive axis.
struct ConvexTestFunction {
    std::function<double(double)> fn;
    double bound_m = 1.0;
    double bound_beta = 2.0;
    std::string name = "test";
};

struct KahaneCheckResult {
    double lhs_mean = 0.0;
    double lhs_stderr = 0.0;
    double rhs_mean = 0.0;
    double rhs_stderr = 0.0;
    bool pass = false;  // lhs <= rhs within 3 combined standard errors
};

/// Monte Carlo comparison of E F(sum_i nu_i e^{Y_i - Var/2}) under two
/// covariance matrices with K <= K' + shift entrywise (shift = 0 is the
/// plain ordering). For a positive shift the right side gains the
/// independent factor e^{sqrt(shift) Z - shift/2}. Both matrices must be
/// positive semidefinite; the test function must satisfy its declared
/// growth bound and midpoint convexity on the sampled values, otherwise it
/// is rejected.
KahaneCheckResult kahane_check(const std::vector<double>& weights,
                               const std::vector<std::vector<double>>& gram,
                               const std::vector<std::vector<double>>& gram_upper,
                               double shift, const ConvexTestFunction& f,
                               const MCConfig& config);

}  // namespace liouville
