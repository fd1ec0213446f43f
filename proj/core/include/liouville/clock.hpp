#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "liouville/brownian.hpp"
#include "liouville/field_sampler.hpp"

namespace liouville {

/// The additive-functional clock of a path through a chaos density:
/// samples of F_n(t) on the path's time grid. Strictly increasing for
/// gamma < 2; the identity when gamma = 0.
struct PathClock {
    BrownianPath path;
    int level = 0;
    double gamma = 0.0;
    std::vector<double> values;  // values[k] = F(k * dt); values[0] = 0
    /// Set when the path left the field grid; the clock is truncated there.
    std::optional<std::size_t> truncated_at;

    double terminal() const { return values.back(); }
    double dt() const { return path.dt; }

    /// Piecewise-linear inverse; invert(values[k]) = k * dt exactly.
    double invert(double quantum_time) const;
    /// Piecewise-linear forward evaluation at arbitrary classical time.
    double at_time(double classical_time) const;
};

/// Left-endpoint Riemann sum of the normalized chaos density along the path,
/// with compensated accumulation. The density weight at each step is
/// exp(gamma X_n(B) - (gamma^2/2) Var X_n).
PathClock compute_clock(const BrownianPath& path, const FieldStack& stack, int n,
                        double gamma);

/// Liouville Brownian motion samples: positions at uniform quantum times,
/// together with the classical times the inverse clock maps them to.
struct LBMPath {
    double quantum_dt = 0.0;
    std::vector<double> quantum_times;
    std::vector<Point> positions;
    std::vector<double> classical_times;
};

/// Time-change assembly: positions B(F^{-1}(t)) at quantum times
/// k * quantum_dt up to quantum_horizon. Throws if the horizon exceeds the
/// clock's terminal value.
LBMPath build_lbm(const BrownianPath& path, const PathClock& clock,
                  double quantum_dt, double quantum_horizon);

/// Euler-Maruyama integration of the level-n diffusion with coefficient
/// c_n^{-gamma^2/4} exp(-(gamma/2) X_n). Equal in law to build_lbm at fixed
/// quantum times. With gamma = 0 and the same seed it reproduces
/// sample_path bit for bit.
struct SdeResult {
    LBMPath path;
    bool truncated = false;  // left the field grid before the horizon
};

SdeResult integrate_n_lbm_sde(const FieldStack& stack, int n, double gamma,
                              const Point& start, double quantum_horizon,
                              double quantum_dt, std::uint64_t seed);

/// Cross-bracket decay data for one decomposition level.
struct BracketLevel {
    int level = 0;
    double log_scale = 0.0;      // ln c_n
    double bracket_sup = 0.0;    // sup over t <= T of the cross bracket
    double tight_factor_sup = 0.0;  // the same without the decaying prefactor
};

/// The cross bracket of the level-n auxiliary Brownian motion with the
/// driving motion, evaluated along `path` for each requested level:
/// c_n^{-gamma^2/4} * integral of exp((gamma/2) X_n(B_u)) du over [0, t].
/// The sup over t <= horizon is the terminal value since the integrand is
/// positive. tight_factor_sup carries the half-exponent clock alone, which
/// stays bounded across levels.
std::vector<BracketLevel> bracket_series(const FieldStack& stack, double gamma,
                                         const std::vector<int>& levels,
                                         const BrownianPath& path);

}  // namespace liouville
