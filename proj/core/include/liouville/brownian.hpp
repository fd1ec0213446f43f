#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "liouville/grid.hpp"

namespace liouville {

/// Planar Brownian path on a uniform time grid. positions[k] is the state
/// at time k * dt; increments are i.i.d. N(0, dt) per coordinate.
struct BrownianPath {
    Point start;
    double dt = 0.0;
    std::vector<Point> positions;
    std::uint64_t seed = 0;

    std::size_t steps() const { return positions.empty() ? 0 : positions.size() - 1; }
    double horizon() const { return static_cast<double>(steps()) * dt; }
    double time_of(std::size_t index) const { return static_cast<double>(index) * dt; }
};

/// Samples a path of ceil(T/dt) steps. Deterministic in the seed; the same
/// seed drives the SDE integrator so that the gamma = 0 degeneracies are
/// exact path identities.
BrownianPath sample_path(const Point& start, double horizon, double dt,
                         std::uint64_t seed);

/// First discrete time leaving the open ball B(center, radius): the smallest
/// k with |B_k - center| >= radius, as a time k * dt. Starting on or outside
/// the boundary gives 0; nullopt if the path never leaves within its horizon.
std::optional<double> first_exit_time(const BrownianPath& path, double radius,
                                      const Point& center = {0.0, 0.0});

/// Index form of first_exit_time.
std::optional<std::size_t> first_exit_index(const BrownianPath& path, double radius,
                                            const Point& center = {0.0, 0.0});

/// The path truncated after `index` steps (positions 0..index).
BrownianPath stopped_at(const BrownianPath& path, std::size_t index);

}  // namespace liouville
