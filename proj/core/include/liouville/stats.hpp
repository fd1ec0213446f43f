#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace liouville {

/// Pairwise (cascade) summation. Deterministic for a fixed element order,
/// which is how replica reductions stay reproducible under threading.
inline double pairwise_sum(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

/// Compensated accumulator for long sums of mixed magnitudes.
class KahanSum {
public:
    void add(double x) {
        const double y = x - compensation_;
        const double t = sum_ + y;
        compensation_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

struct MeanStderr {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n == 0) return {};
    const double mean = pairwise_sum(xs) / static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

/// Weighted least squares line through (x_i, y_i) with weights w_i = 1/var_i.
/// With unit weights the slope stderr falls back to the residual-based
/// estimate.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y,
                        std::span<const double> sigma = {}) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) {
        throw std::invalid_argument("fit_line: need >= 2 matched points");
    }
    std::vector<double> w(n, 1.0);
    bool have_sigma = !sigma.empty();
    if (have_sigma) {
        if (sigma.size() != n) throw std::invalid_argument("fit_line: sigma size");
        for (std::size_t i = 0; i < n; ++i) {
            if (sigma[i] > 0) {
                w[i] = 1.0 / (sigma[i] * sigma[i]);
            } else {
                have_sigma = false;  // degenerate, fall back to unit weights
            }
        }
        if (!have_sigma) std::fill(w.begin(), w.end(), 1.0);
    }

    double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        swx += w[i] * x[i];
        swy += w[i] * y[i];
        swxx += w[i] * x[i] * x[i];
        swxy += w[i] * x[i] * y[i];
    }
    const double denom = sw * swxx - swx * swx;
    if (denom <= 0) throw std::invalid_argument("fit_line: degenerate x");

    LineFit fit;
    fit.slope = (sw * swxy - swx * swy) / denom;
    fit.intercept = (swy - fit.slope * swx) / sw;

    double ss_res = 0, ss_tot = 0, chi2 = 0;
    const double ybar = swy / sw;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
        chi2 += w[i] * r * r;
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;

    if (have_sigma) {
        fit.slope_stderr = std::sqrt(sw / denom);
    } else if (n > 2) {
        const double s2 = chi2 / static_cast<double>(n - 2);
        fit.slope_stderr = std::sqrt(s2 * sw / denom);
    } else {
        fit.slope_stderr = 0.0;
    }
    return fit;
}

}  // namespace liouville
