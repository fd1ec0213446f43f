// Test-side oracles, kept independent of the library's evaluation paths:
// brute-force quadratures of classical integral representations plus small
// statistics helpers.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

// Modified Bessel K_nu(x) via the cosh representation, integrated by a plain
// trapezoid rule. The integrand decays double-exponentially, so a fixed fine
// step reaches ~1e-12 relative accuracy.
inline double bessel_k(int nu, double x) {
    const double upper = std::log(1600.0 / x) + 4.0;
    const double span = std::max(upper, 8.0);
    const int n = 40000;
    const double h = span / n;
    double sum = 0.5 * std::exp(-x);  // t = 0 term: cosh(0) = 1
    for (int i = 1; i < n; ++i) {
        const double t = i * h;
        const double c = std::cosh(t);
        const double w = std::exp(-x * c);
        if (w == 0.0) break;
        sum += w * (nu == 0 ? 1.0 : std::cosh(nu * t));
    }
    return sum * h;
}

inline double k0(double x) { return bessel_k(0, x); }
inline double k1(double x) { return bessel_k(1, x); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample Kolmogorov-Smirnov statistic against N(mean, sd^2).
inline double ks_statistic(std::vector<double> samples, double mean, double sd) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf((samples[i] - mean) / sd);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Critical value of the KS statistic at significance alpha (asymptotic).
inline double ks_critical(std::size_t n, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_sd(const std::vector<double>& xs) {
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double stderr_of_mean(const std::vector<double>& xs) {
    return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace oracle
