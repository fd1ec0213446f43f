#include "liouville/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace liouville {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Shared integrand of G_m and k_m after substitution: both reduce to
// integrals of exp(-t - x^2/(4t)) against dt/(2t) and dt respectively,
// with x = m r.
double bessel_type_integrand(double t, double x_sq_over_4) {
    if (t <= 0) return 0.0;
    const double expo = -t - x_sq_over_4 / t;
    return expo < -745.0 ? 0.0 : std::exp(expo);
}

void require_positive_mass(double mass) {
    if (!(mass > 0)) throw ParameterError("kernel: mass must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// Schedules.

std::vector<double> dyadic_schedule(int truncation) {
    if (truncation < 1) throw ParameterError("schedule: truncation must be >= 1");
    std::vector<double> c(truncation);
    for (int n = 0; n < truncation; ++n) c[n] = std::ldexp(1.0, n);
    return c;
}

SimulationParams SimulationParams::with_dyadic_schedule(double gamma, double mass,
                                                        int truncation) {
    SimulationParams p;
    p.gamma = gamma;
    p.mass = mass;
    p.truncation = truncation;
    p.scale_schedule = dyadic_schedule(truncation);
    p.validate();
    return p;
}

void SimulationParams::validate() const {
    if (!(gamma >= 0.0 && gamma < 2.0))
        throw ParameterError("params: gamma must lie in [0, 2)");
    require_positive_mass(mass);
    if (truncation < 1 || scale_schedule.size() != static_cast<std::size_t>(truncation))
        throw ParameterError("params: schedule length must equal truncation");
    if (scale_schedule.front() != 1.0)
        throw ParameterError("params: schedule must start at c_1 = 1");
    for (int n = 1; n < truncation; ++n) {
        if (!(scale_schedule[n] > scale_schedule[n - 1]))
            throw ParameterError("params: schedule must be strictly increasing");
    }
}

double SimulationParams::layer_lower(int n) const {
    if (n < 1 || n > truncation) throw ParameterError("params: layer index out of range");
    return n == 1 ? scale_schedule[0] : scale_schedule[n - 2];
}

double SimulationParams::cumulative_variance(int n) const {
    if (n < 1 || n > truncation) throw ParameterError("params: level out of range");
    return std::log(scale_schedule[n - 1]);
}

double SimulationParams::layer_variance(int n) const {
    return std::log(layer_upper(n) / layer_lower(n));
}

// ---------------------------------------------------------------------------
// Quadrature-backed kernels.

double eval_massive_green(double mass, double r) {
    require_positive_mass(mass);
    if (r < 0) throw DomainError("massive green: negative radius");
    if (r == 0) throw DomainError("massive green: log singularity at r = 0");
    const double x = mass * r;
    const double x_sq_over_4 = 0.25 * x * x;
    return integrate_half_line(
        [x_sq_over_4](double t) {
            return bessel_type_integrand(t, x_sq_over_4) / (2.0 * t);
        },
        0.0);
}

double eval_k_seed(double mass, double r) {
    require_positive_mass(mass);
    if (r < 0) throw DomainError("k seed: negative radius");
    if (r == 0) return 1.0;
    const double x = mass * r;
    const double x_sq_over_4 = 0.25 * x * x;
    return integrate_half_line(
        [x_sq_over_4](double t) { return bessel_type_integrand(t, x_sq_over_4); },
        0.0);
}

namespace {

// Integral of k_m(u r)/u over [lo, hi] on the log scale u = e^v.
double star_segment(double mass, double r, double lo, double hi,
                    const std::function<double(double)>& k_of_r) {
    if (!(hi > lo)) return 0.0;
    if (r == 0) return std::log(hi / lo);
    // k_m decays exponentially; beyond the cutoff the tail is below 1e-18.
    const double u_cut = 60.0 / (mass * r);
    const double hi_eff = std::min(hi, std::max(lo, u_cut));
    if (hi_eff <= lo) return 0.0;
    return integrate([&](double v) { return k_of_r(std::exp(v) * r); },
                     std::log(lo), std::log(hi_eff));
}

}  // namespace

double eval_layer_cov(const SimulationParams& params, int n, double r) {
    params.validate();
    if (n < 1 || n > params.truncation)
        throw ParameterError("layer cov: layer index out of range");
    if (r < 0) throw DomainError("layer cov: negative radius");
    if (n == 1) return 0.0;
    if (r == 0) return params.layer_variance(n);
    const double m = params.mass;
    return star_segment(m, r, params.layer_lower(n), params.layer_upper(n),
                        [m](double s) { return eval_k_seed(m, s); });
}

double eval_cumulative_cov(const SimulationParams& params, int n, double r) {
    params.validate();
    if (n < 1 || n > params.truncation)
        throw ParameterError("cumulative cov: level out of range");
    if (r < 0) throw DomainError("cumulative cov: negative radius");
    if (r == 0) return params.cumulative_variance(n);
    const double m = params.mass;
    return star_segment(m, r, 1.0, params.scale_schedule[n - 1],
                        [m](double s) { return eval_k_seed(m, s); });
}

double eval_star_integral(double mass, double r) {
    require_positive_mass(mass);
    if (!(r > 0)) throw DomainError("star integral: radius must be positive");
    const double u_cut = 60.0 / (mass * r);
    if (u_cut <= 1.0) return 0.0;
    return integrate(
        [mass, r](double v) { return eval_k_seed(mass, std::exp(v) * r); }, 0.0,
        std::log(u_cut));
}

double eval_wn_slice_cov(double eps, double eps_prime, double r) {
    if (!(eps > 0 && eps <= 1) || !(eps_prime > 0 && eps_prime <= 1))
        throw ParameterError("wn slice: cutoffs must lie in (0, 1]");
    if (r < 0) throw DomainError("wn slice: negative radius");
    const double cutoff = std::max(eps, eps_prime);
    if (r > 2.0) return 0.0;
    if (r >= cutoff) return std::log(2.0 / r);
    return std::log(2.0 / cutoff) + 2.0 * (1.0 - std::sqrt(r / cutoff));
}

double eval_log_plus(double r) {
    if (r < 0) throw DomainError("log plus: negative radius");
    if (r == 0) throw DomainError("log plus: singular at r = 0");
    return r >= 1.0 ? 0.0 : std::log(1.0 / r);
}

double eval_exact_scale_invariant(double r) {
    if (r < 0) throw DomainError("scale invariant kernel: negative radius");
    if (r == 0) throw DomainError("scale invariant kernel: singular at r = 0");
    return r >= 2.0 ? 0.0 : std::log(2.0 / r);
}

double eval_disk_green(double radius, const Point& x, const Point& y) {
    if (!(radius > 0)) throw ParameterError("disk green: radius must be positive");
    const double r2 = radius * radius;
    if (x.x * x.x + x.y * x.y > r2 * (1 + 1e-12) ||
        y.x * y.x + y.y * y.y > r2 * (1 + 1e-12))
        throw DomainError("disk green: point outside the closed ball");
    const double dx = x.x - y.x;
    const double dy = x.y - y.y;
    const double sep = std::sqrt(dx * dx + dy * dy);
    if (sep == 0) throw DomainError("disk green: coincident points");
    // Conformal form: |R^2 - conj(x) y| / (R |x - y|), with the numerator
    // computed from the dot and cross products of x and y.
    const double dot = x.x * y.x + x.y * y.y;
    const double cross = x.x * y.y - x.y * y.x;
    const double num = std::hypot(r2 - dot, cross);
    const double value = std::log(num / (radius * sep)) / kPi;
    return std::max(value, 0.0);
}

bool check_scale_bound(double mass, const Point& x, const Point& y, double eps) {
    if (!(eps > 0 && eps <= 1)) throw ParameterError("scale bound: eps must lie in (0, 1]");
    const double r = distance(x, y);
    if (r == 0) throw DomainError("scale bound: coincident points");
    const double lhs = eval_massive_green(mass, r);
    const double rhs = eval_massive_green(mass, r / eps) + std::log(1.0 / eps);
    return lhs <= rhs + 1e-8;
}

// ---------------------------------------------------------------------------
// KernelSpec.

std::string to_string(KernelVariant variant) {
    switch (variant) {
        case KernelVariant::massive_green: return "massive-green";
        case KernelVariant::k_seed: return "k-seed";
        case KernelVariant::layer: return "layer";
        case KernelVariant::wn_slice: return "wn-slice";
        case KernelVariant::log_plus: return "log-plus";
        case KernelVariant::exact_scale_invariant: return "exact-scale-invariant";
    }
    return "unknown";
}

KernelSpec KernelSpec::layer_kernel(const SimulationParams& params, int n) {
    params.validate();
    if (n < 1 || n > params.truncation)
        throw ParameterError("kernel spec: layer index out of range");
    KernelSpec spec;
    spec.variant = KernelVariant::layer;
    spec.mass = params.mass;
    spec.layer_index = n;
    spec.schedule = params.scale_schedule;
    return spec;
}

KernelSpec KernelSpec::wn_slice_kernel(double eps, double eps_prime) {
    KernelSpec spec;
    spec.variant = KernelVariant::wn_slice;
    spec.eps_pair = {eps, eps_prime};
    spec.validate();
    return spec;
}

void KernelSpec::validate() const {
    if (!(mass > 0)) throw ParameterError("kernel spec: mass must be positive");
    if (layer_index < 1) throw ParameterError("kernel spec: layer index must be >= 1");
    if (variant == KernelVariant::layer) {
        if (schedule.empty() ||
            layer_index > static_cast<int>(schedule.size()))
            throw ParameterError("kernel spec: layer variant needs a schedule");
    }
    if (variant == KernelVariant::wn_slice) {
        auto in_range = [](double e) { return e > 0 && e <= 1; };
        if (!in_range(eps_pair.first) || !in_range(eps_pair.second))
            throw ParameterError("kernel spec: cutoffs must lie in (0, 1]");
    }
}

namespace {

SimulationParams params_for_spec(const KernelSpec& spec) {
    SimulationParams p;
    p.gamma = 0.0;
    p.mass = spec.mass;
    p.scale_schedule = spec.schedule;
    p.truncation = static_cast<int>(spec.schedule.size());
    return p;
}

}  // namespace

double KernelSpec::evaluate(double r) const {
    validate();
    switch (variant) {
        case KernelVariant::massive_green: return eval_massive_green(mass, r);
        case KernelVariant::k_seed: return eval_k_seed(mass, r);
        case KernelVariant::layer:
            return eval_layer_cov(params_for_spec(*this), layer_index, r);
        case KernelVariant::wn_slice:
            return eval_wn_slice_cov(eps_pair.first, eps_pair.second, r);
        case KernelVariant::log_plus: return eval_log_plus(r);
        case KernelVariant::exact_scale_invariant:
            return eval_exact_scale_invariant(r);
    }
    throw ParameterError("kernel spec: unknown variant");
}

std::optional<double> KernelSpec::value_at_zero() const {
    switch (variant) {
        case KernelVariant::k_seed: return 1.0;
        case KernelVariant::layer:
            return params_for_spec(*this).layer_variance(layer_index);
        case KernelVariant::wn_slice: {
            const double cutoff = std::max(eps_pair.first, eps_pair.second);
            return std::log(2.0 / cutoff) + 2.0;
        }
        default: return std::nullopt;
    }
}

bool KernelSpec::samplable() const { return value_at_zero().has_value(); }

// ---------------------------------------------------------------------------
// Radial tables.

namespace {

// k_m tables are shared across layer tables of the same mass.
class KSeedCache {
public:
    static const RadialTable& get(double mass) {
        static KSeedCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        auto it = cache.tables_.find(mass);
        if (it == cache.tables_.end()) {
            KernelSpec spec;
            spec.variant = KernelVariant::k_seed;
            spec.mass = mass;
            // Exponential decay makes the tail negligible past 60/m.
            auto table = std::make_unique<RadialTable>(spec, 60.0 / mass);
            it = cache.tables_.emplace(mass, std::move(table)).first;
        }
        return *it->second;
    }

private:
    std::mutex mutex_;
    std::map<double, std::unique_ptr<RadialTable>> tables_;
};

}  // namespace

RadialTable::RadialTable(const KernelSpec& spec, double r_max, int nodes) {
    spec.validate();
    if (!spec.samplable())
        throw ParameterError("radial table: kernel diverges at r = 0");
    if (!(r_max > 0) || nodes < 8)
        throw ParameterError("radial table: bad geometry");

    r_max_ = r_max;
    step_ = r_max / (nodes - 1);
    radii_.resize(nodes);
    values_.resize(nodes);
    for (int i = 0; i < nodes; ++i) radii_[i] = i * step_;

    if (spec.variant == KernelVariant::layer) {
        // Integrate the shared seed table on the log scale instead of
        // running the nested quadrature at every node.
        const RadialTable& k_table = KSeedCache::get(spec.mass);
        const SimulationParams params = params_for_spec(spec);
        const double lo = params.layer_lower(spec.layer_index);
        const double hi = params.layer_upper(spec.layer_index);
        values_[0] = *spec.value_at_zero();
        for (int i = 1; i < nodes; ++i) {
            const double r = radii_[i];
            values_[i] = star_segment(spec.mass, r, lo, hi,
                                      [&k_table](double s) { return k_table(s); });
        }
    } else {
        values_[0] = *spec.value_at_zero();
        for (int i = 1; i < nodes; ++i) values_[i] = spec.evaluate(radii_[i]);
    }
}

double RadialTable::operator()(double r) const {
    if (r <= 0) return values_.front();
    if (r >= r_max_) return values_.back();
    const int n = static_cast<int>(values_.size());
    int i = static_cast<int>(r / step_);
    if (i > n - 2) i = n - 2;
    // Four-point Lagrange stencil clamped at the ends.
    int i0 = i - 1;
    if (i0 < 0) i0 = 0;
    if (i0 > n - 4) i0 = n - 4;
    const double t = (r - radii_[i0]) / step_;
    const double t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
    const double w0 = -t1 * t2 * t3 / 6.0;
    const double w1 = t * t2 * t3 / 2.0;
    const double w2 = -t * t1 * t3 / 2.0;
    const double w3 = t * t1 * t2 / 6.0;
    return w0 * values_[i0] + w1 * values_[i0 + 1] + w2 * values_[i0 + 2] +
           w3 * values_[i0 + 3];
}

}  // namespace liouville
