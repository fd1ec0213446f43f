#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "liouville/grid.hpp"
#include "liouville/quadrature.hpp"

namespace liouville {

/// Thrown when a kernel or schedule parameter is out of range.
class ParameterError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown for evaluations outside a kernel's domain (coincident points,
/// points outside a ball, and the like).
class DomainError : public std::domain_error {
    using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Scale schedules and simulation-wide parameters.

/// The dyadic schedule c_n = 2^(n-1). The first scale is pinned to 1, so the
/// first layer of the decomposition is degenerate and every later layer has
/// variance ln 2.
std::vector<double> dyadic_schedule(int truncation);

struct SimulationParams {
    double gamma = 1.0;
    double mass = 1.0;
    std::vector<double> scale_schedule;  // c_1 = 1 < c_2 < ...
    int truncation = 0;                  // number of layers N

    static SimulationParams with_dyadic_schedule(double gamma, double mass,
                                                 int truncation);

    void validate() const;

    /// Lower integration bound of layer n; layer 1 is the zero-width layer.
    double layer_lower(int n) const;
    double layer_upper(int n) const { return scale_schedule.at(n - 1); }

    /// Var X_n = ln c_n under the convention c_1 = 1.
    double cumulative_variance(int n) const;
    /// Var Y_n = ln(c_n / c_{n-1}).
    double layer_variance(int n) const;
};

// ---------------------------------------------------------------------------
// Kernel evaluations. All radial arguments are Euclidean distances.

/// Massive Green function G_m(r), evaluated by adaptive quadrature of the
/// transition-density integral after the substitution that makes both
/// endpoints integrable. Depends on m and r only through the product m*r.
/// Diverges logarithmically as r -> 0.
double eval_massive_green(double mass, double r);

/// Seed kernel k_m(r) of the star-scale decomposition; k_m(0) = 1 and
/// k_m is continuous and decreasing.
double eval_k_seed(double mass, double r);

/// Covariance of decomposition layer n at lag r: the integral of
/// k_m(u r)/u over [c_{n-1}, c_n]. Layer 1 is identically zero.
double eval_layer_cov(const SimulationParams& params, int n, double r);

/// Covariance of the partial sum X_n at lag r (integral from 1 to c_n).
double eval_cumulative_cov(const SimulationParams& params, int n, double r);

/// The full star-scale integral of k_m(u r)/u over [1, inf). Agrees with
/// the massive Green function; kept as a second algebraic route for
/// consistency checks.
double eval_star_integral(double mass, double r);

/// Covariance of the white-noise-decomposition slices at cutoffs
/// (eps, eps_prime), lag r. Three-case closed form; compactly supported.
double eval_wn_slice_cov(double eps, double eps_prime, double r);

/// ln_+ (1/r), the comparison log kernel.
double eval_log_plus(double r);

/// ln_+ (2/r), the exactly scale-invariant log kernel.
double eval_exact_scale_invariant(double r);

/// Green function of the Laplacian on the ball B(0, R) with Dirichlet
/// boundary data, normalized so that Delta G_R = -2 delta_x. Closed
/// conformal form.
double eval_disk_green(double radius, const Point& x, const Point& y);

/// Checks G_m(x, y) <= G_m(x/eps, y/eps) + ln(1/eps) for eps in (0, 1],
/// within quadrature tolerance.
bool check_scale_bound(double mass, const Point& x, const Point& y, double eps);

// ---------------------------------------------------------------------------
// Kernel descriptor used by samplers and Gram-matrix checks.

enum class KernelVariant {
    massive_green,
    k_seed,
    layer,
    wn_slice,
    log_plus,
    exact_scale_invariant,
};

std::string to_string(KernelVariant variant);

/// A covariance kernel with its parameters. `layer_index` selects the layer
/// for the layer variant; `eps_pair` gives the cutoffs for the white-noise
/// slice variant. `schedule` backs the layer variant and defaults to the
/// dyadic schedule when only the index is given.
struct KernelSpec {
    KernelVariant variant = KernelVariant::k_seed;
    double mass = 1.0;
    int layer_index = 1;
    std::pair<double, double> eps_pair{1.0, 1.0};
    std::vector<double> schedule;  // required for the layer variant

    static KernelSpec layer_kernel(const SimulationParams& params, int n);
    static KernelSpec wn_slice_kernel(double eps, double eps_prime);

    void validate() const;

    /// Radial evaluation. Diverging variants throw DomainError at r = 0.
    double evaluate(double r) const;

    /// Value at r = 0; nullopt for variants that diverge there.
    std::optional<double> value_at_zero() const;

    /// True when the variant has finite variance and can back a Gaussian
    /// sampler.
    bool samplable() const;
};

// ---------------------------------------------------------------------------
// Radial lookup table used on sampling hot paths.

/// Dense radial table with local cubic interpolation. Accuracy is tested
/// against direct quadrature; the default node count keeps interpolation
/// error under 1e-6 for the kernels used here.
class RadialTable {
public:
    RadialTable() = default;
    RadialTable(const KernelSpec& spec, double r_max, int nodes = 1 << 15);

    double operator()(double r) const;
    double r_max() const { return r_max_; }

    /// Rows of (r, value) pairs for CSV export.
    const std::vector<double>& radii() const { return radii_; }
    const std::vector<double>& values() const { return values_; }

private:
    double r_max_ = 0.0;
    double step_ = 0.0;
    std::vector<double> radii_;
    std::vector<double> values_;
};

}  // namespace liouville
