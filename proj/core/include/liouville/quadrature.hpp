#pragma once

#include <functional>

namespace liouville {

/// Options for the adaptive integrator. The absolute floor keeps the
/// subdivision from chasing noise once an interval contributes nothing.
struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_floor = 1e-14;
    int max_depth = 64;
};

/// Adaptive Gauss-Kronrod (7-15) integration of f over [a, b].
/// Bisects intervals until the embedded error estimate satisfies the
/// tolerance. Throws std::runtime_error if the depth limit is hit while
/// the error estimate is still above both thresholds.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

/// Integral of f over [a, +inf). The tail is folded onto a finite interval
/// with the substitution t = a + s/(1-s).
double integrate_half_line(const std::function<double(double)>& f, double a,
                           const QuadratureOptions& opts = {});

}  // namespace liouville
