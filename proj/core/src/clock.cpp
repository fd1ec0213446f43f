#include "liouville/clock.hpp"

#include <algorithm>
#include <cmath>

#include "liouville/rng.hpp"
#include "liouville/stats.hpp"

namespace liouville {

namespace {

void require_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma < 2.0))
        throw ParameterError("clock: gamma must lie in [0, 2)");
}

}  // namespace

PathClock compute_clock(const BrownianPath& path, const FieldStack& stack, int n,
                        double gamma) {
    require_gamma(gamma);
    const int idx = stack.index_of_level(n);
    const Grid2D& field = stack.partial_sums[idx];
    const double shift = 0.5 * gamma * gamma * stack.level_variance(n);

    PathClock clock;
    clock.path = path;
    clock.level = n;
    clock.gamma = gamma;
    clock.values.resize(path.positions.size());
    clock.values[0] = 0.0;

    KahanSum sum;
    const std::size_t steps = path.steps();
    for (std::size_t k = 0; k < steps; ++k) {
        const Point& p = path.positions[k];
        if (!stack.grid.periodic && !stack.grid.contains(p)) {
            clock.truncated_at = k;
            // Freeze the clock at the exit value.
            for (std::size_t j = k + 1; j <= steps; ++j)
                clock.values[j] = clock.values[k];
            return clock;
        }
        const double x = grid_value_at(field, stack.grid, p);
        const double weight = gamma == 0.0
                                  ? path.dt
                                  : std::exp(gamma * x - shift) * path.dt;
        sum.add(weight);
        clock.values[k + 1] = sum.value();
    }
    return clock;
}

double PathClock::invert(double quantum_time) const {
    if (quantum_time < 0)
        throw DomainError("clock: negative quantum time");
    if (quantum_time > terminal() * (1 + 1e-12))
        throw DomainError("horizon exceeded");
    if (quantum_time <= 0) return 0.0;
    const auto it = std::lower_bound(values.begin(), values.end(), quantum_time);
    const std::size_t hi = std::min<std::size_t>(it - values.begin(), values.size() - 1);
    if (hi == 0) return 0.0;
    const std::size_t lo = hi - 1;
    const double f_lo = values[lo];
    const double f_hi = values[hi];
    const double frac = f_hi > f_lo ? (quantum_time - f_lo) / (f_hi - f_lo) : 0.0;
    return (static_cast<double>(lo) + frac) * path.dt;
}

double PathClock::at_time(double classical_time) const {
    if (classical_time <= 0) return 0.0;
    const double u = classical_time / path.dt;
    const auto lo = static_cast<std::size_t>(u);
    if (lo >= values.size() - 1) return values.back();
    const double frac = u - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

Point path_position_at(const BrownianPath& path, double classical_time) {
    const double u = classical_time / path.dt;
    const auto lo = static_cast<std::size_t>(u);
    if (lo >= path.positions.size() - 1) return path.positions.back();
    const double frac = u - static_cast<double>(lo);
    const Point& a = path.positions[lo];
    const Point& b = path.positions[lo + 1];
    if (frac == 0.0) return a;
    return {a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)};
}

}  // namespace

LBMPath build_lbm(const BrownianPath& path, const PathClock& clock,
                  double quantum_dt, double quantum_horizon) {
    if (!(quantum_dt > 0)) throw ParameterError("lbm: quantum_dt must be positive");
    if (quantum_horizon > clock.terminal() * (1 + 1e-12))
        throw DomainError("horizon exceeded");

    const auto steps =
        static_cast<std::size_t>(std::floor(quantum_horizon / quantum_dt + 1e-12));
    LBMPath lbm;
    lbm.quantum_dt = quantum_dt;
    lbm.quantum_times.resize(steps + 1);
    lbm.positions.resize(steps + 1);
    lbm.classical_times.resize(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * quantum_dt;
        const double s = clock.invert(std::min(t, clock.terminal()));
        lbm.quantum_times[k] = t;
        lbm.classical_times[k] = s;
        lbm.positions[k] = path_position_at(path, s);
    }
    return lbm;
}

SdeResult integrate_n_lbm_sde(const FieldStack& stack, int n, double gamma,
                              const Point& start, double quantum_horizon,
                              double quantum_dt, std::uint64_t seed) {
    require_gamma(gamma);
    if (!(quantum_horizon > 0) || !(quantum_dt > 0))
        throw ParameterError("sde: horizon and dt must be positive");
    const int idx = stack.index_of_level(n);
    const Grid2D& field = stack.partial_sums[idx];
    // Diffusion coefficient c_n^{-gamma^2/4} e^{-(gamma/2) X_n}.
    const double shift = 0.25 * gamma * gamma * stack.level_variance(n);

    const auto steps =
        static_cast<std::size_t>(std::ceil(quantum_horizon / quantum_dt - 1e-12));
    SdeResult result;
    LBMPath& out = result.path;
    out.quantum_dt = quantum_dt;
    out.quantum_times.resize(steps + 1);
    out.positions.resize(steps + 1);
    out.classical_times.assign(steps + 1, 0.0);
    out.positions[0] = start;
    out.quantum_times[0] = 0.0;

    // Same stream layout as sample_path: with gamma = 0 the increments and
    // their order coincide, so the solution is the Brownian path itself.
    GaussianRng rng(derive_stream(seed, 0,
                                  static_cast<std::uint64_t>(StreamPurpose::path)));
    const double scale = std::sqrt(quantum_dt);
    Point z = start;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double g1 = rng.normal();
        const double g2 = rng.normal();
        double coeff = 1.0;
        if (gamma != 0.0) {
            if (!stack.grid.periodic && !stack.grid.contains(z)) {
                result.truncated = true;
                for (std::size_t j = k; j <= steps; ++j) {
                    out.positions[j] = z;
                    out.quantum_times[j] = static_cast<double>(j) * quantum_dt;
                }
                return result;
            }
            const double x = grid_value_at(field, stack.grid, z);
            coeff = std::exp(-0.5 * gamma * x - shift);
        }
        z.x += coeff * scale * g1;
        z.y += coeff * scale * g2;
        out.positions[k] = z;
        out.quantum_times[k] = static_cast<double>(k) * quantum_dt;
    }
    return result;
}

std::vector<BracketLevel> bracket_series(const FieldStack& stack, double gamma,
                                         const std::vector<int>& levels,
                                         const BrownianPath& path) {
    require_gamma(gamma);
    std::vector<BracketLevel> out;
    out.reserve(levels.size());
    const double half_gamma = 0.5 * gamma;
    for (int n : levels) {
        const int idx = stack.index_of_level(n);
        const Grid2D& field = stack.partial_sums[idx];
        const double log_cn = stack.level_variance(n);
        // Half-exponent clock normalization: (gamma/2)^2 / 2 * ln c_n.
        const double half_shift = 0.5 * half_gamma * half_gamma * log_cn;

        KahanSum tight;
        const std::size_t steps = path.steps();
        for (std::size_t k = 0; k < steps; ++k) {
            const double x = grid_value_at(field, stack.grid, path.positions[k]);
            tight.add(std::exp(half_gamma * x - half_shift) * path.dt);
        }
        BracketLevel level;
        level.level = n;
        level.log_scale = log_cn;
        level.tight_factor_sup = tight.value();
        // One extra decaying prefactor c_n^{-gamma^2/8}.
        level.bracket_sup = std::exp(-0.125 * gamma * gamma * log_cn) * tight.value();
        out.push_back(level);
    }
    return out;
}

}  // namespace liouville
