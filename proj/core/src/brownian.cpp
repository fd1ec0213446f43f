#include "liouville/brownian.hpp"

#include <cmath>
#include <stdexcept>

#include "liouville/rng.hpp"

namespace liouville {

BrownianPath sample_path(const Point& start, double horizon, double dt,
                         std::uint64_t seed) {
    if (!(horizon > 0) || !(dt > 0))
        throw std::invalid_argument("path: horizon and dt must be positive");
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));

    BrownianPath path;
    path.start = start;
    path.dt = dt;
    path.seed = seed;
    path.positions.resize(steps + 1);
    path.positions[0] = start;

    GaussianRng rng(derive_stream(seed, 0,
                                  static_cast<std::uint64_t>(StreamPurpose::path)));
    const double scale = std::sqrt(dt);
    Point p = start;
    for (std::size_t k = 1; k <= steps; ++k) {
        p.x += scale * rng.normal();
        p.y += scale * rng.normal();
        path.positions[k] = p;
    }
    return path;
}

std::optional<std::size_t> first_exit_index(const BrownianPath& path, double radius,
                                            const Point& center) {
    if (!(radius > 0)) throw std::invalid_argument("exit: radius must be positive");
    const double r2 = radius * radius;
    for (std::size_t k = 0; k < path.positions.size(); ++k) {
        const double dx = path.positions[k].x - center.x;
        const double dy = path.positions[k].y - center.y;
        if (dx * dx + dy * dy >= r2) return k;
    }
    return std::nullopt;
}

std::optional<double> first_exit_time(const BrownianPath& path, double radius,
                                      const Point& center) {
    const auto idx = first_exit_index(path, radius, center);
    if (!idx) return std::nullopt;
    return path.time_of(*idx);
}

BrownianPath stopped_at(const BrownianPath& path, std::size_t index) {
    BrownianPath out = path;
    if (index + 1 < out.positions.size()) out.positions.resize(index + 1);
    return out;
}

}  // namespace liouville
