#include "liouville/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace liouville {

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1] (QUADPACK dqk15).
constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;
    double error;
};

PanelResult gauss_kronrod(const std::function<double(double)>& f, double a,
                          double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(mid - half * kKronrodNodes[i]);
        fv[14 - i] = f(mid + half * kKronrodNodes[i]);
    }
    fv[7] = f(mid);

    double kronrod = 0.0;
    for (int i = 0; i < 8; ++i) {
        kronrod += kKronrodWeights[i] * (i == 7 ? fv[7] : fv[i] + fv[14 - i]);
    }
    // Gauss nodes are the odd-indexed Kronrod nodes.
    double gauss = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 3; ++i) {
        gauss += kGaussWeights[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    }

    const double value = kronrod * half;
    const double error = std::abs((kronrod - gauss) * half);
    return {value, error};
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                const QuadratureOptions& opts, double global_scale,
                int depth) {
    const PanelResult panel = gauss_kronrod(f, a, b);
    const double tol =
        std::max(opts.abs_floor, opts.rel_tol * std::max(global_scale,
                                                         std::abs(panel.value)));
    if (panel.error <= tol || b - a < 1e-300) {
        return panel.value;
    }
    if (depth >= opts.max_depth) {
        throw std::runtime_error("quadrature: refinement limit reached");
    }
    const double mid = 0.5 * (a + b);
    const double scale = std::max(global_scale, std::abs(panel.value));
    return adaptive(f, a, mid, opts, scale, depth + 1) +
           adaptive(f, mid, b, opts, scale, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
    if (!(a < b)) {
        return 0.0;
    }
    return adaptive(f, a, b, opts, 0.0, 0);
}

double integrate_half_line(const std::function<double(double)>& f, double a,
                           const QuadratureOptions& opts) {
    // t = a + s/(1-s) maps [0,1) to [a, inf); dt = ds/(1-s)^2.
    auto folded = [&f, a](double s) {
        const double one_minus = 1.0 - s;
        const double t = a + s / one_minus;
        const double jac = 1.0 / (one_minus * one_minus);
        const double v = f(t);
        return v == 0.0 ? 0.0 : v * jac;
    };
    return adaptive(folded, 0.0, 1.0, opts, 0.0, 0);
}

}  // namespace liouville
