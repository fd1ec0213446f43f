#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace liouville {

/// Result of a log-log regression: slope with its standard error, the
/// goodness of fit, and the scale window actually used.
struct ExponentEstimate {
    double slope = 0.0;
    double stderr_of_slope = 0.0;
    double r_squared = 0.0;
    std::pair<double, double> scale_window{0.0, 0.0};
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
};

/// One regression point: the scale, the reduced statistic, and its error.
struct ScalePoint {
    double scale = 0.0;
    double statistic = 0.0;
    double stderr_of_statistic = 0.0;
};

/// An ExponentEstimate together with the per-scale table it was fitted from.
struct ScalingEstimate {
    ExponentEstimate estimate;
    std::vector<ScalePoint> points;
    std::uint64_t failed_replicas = 0;
};

struct MCConfig {
    std::uint64_t replicas = 2;
    std::uint64_t seed = 0;
    double confidence = 0.99;
    bool quenched = false;  // fixed field with fresh paths when true

    void validate() const;
};

// ---------------------------------------------------------------------------
// Closed-form exponents. Pure and total on gamma in [0, 2).

/// Clock increment spectrum: (1 + g^2/4) q - (g^2/4) q^2.
inline double clock_spectrum_exponent(double gamma, double q) {
    const double g24 = 0.25 * gamma * gamma;
    return (1.0 + g24) * q - g24 * q * q;
}

/// Measure ball-mass spectrum in the plane: (2 + g^2/2) p - (g^2/2) p^2.
inline double measure_spectrum_exponent(double gamma, double p) {
    const double g22 = 0.5 * gamma * gamma;
    return (2.0 + g22) * p - g22 * p * p;
}

/// Upper Hoelder exponent of the clock: (1 - g/2)^2.
inline double holder_upper_exponent(double gamma) {
    const double a = 1.0 - 0.5 * gamma;
    return a * a;
}

/// Lower Hoelder exponent of the clock: (1 + g/2)^2.
inline double holder_lower_exponent(double gamma) {
    const double b = 1.0 + 0.5 * gamma;
    return b * b;
}

/// Ball-mass modulus exponent of the measure: 2 (1 - g/2)^2.
inline double ball_modulus_exponent(double gamma) {
    return 2.0 * holder_upper_exponent(gamma);
}

/// Positive moments of clocks and measures exist below 4/g^2.
inline double moment_order_limit(double gamma) {
    if (gamma == 0.0) return std::numeric_limits<double>::infinity();
    return 4.0 / (gamma * gamma);
}

inline bool moment_exists(double gamma, double order) {
    return order <= 0.0 || order < moment_order_limit(gamma);
}

}  // namespace liouville
