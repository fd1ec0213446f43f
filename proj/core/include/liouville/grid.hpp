#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace liouville {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Square grid centered on the origin. Periodic grids place `resolution`
/// nodes with spacing extent/resolution and wrap; non-periodic grids span
/// the closed square with spacing extent/(resolution-1).
struct GridSpec {
    double extent = 1.0;
    int resolution = 2;
    bool periodic = true;

    void validate() const {
        if (!(extent > 0)) throw std::invalid_argument("grid: extent must be positive");
        if (resolution < 2) throw std::invalid_argument("grid: resolution must be >= 2");
    }

    double spacing() const {
        return periodic ? extent / resolution : extent / (resolution - 1);
    }

    double node_coord(int i) const { return -0.5 * extent + i * spacing(); }

    /// Largest in-grid lag distance (the diagonal of the node layout).
    double max_lag() const {
        const double side = spacing() * (resolution - 1);
        return side * 1.4142135623730951 + spacing();
    }

    bool contains(const Point& p) const {
        const double half = 0.5 * extent;
        return p.x >= -half && p.x <= half && p.y >= -half && p.y <= half;
    }

    bool operator==(const GridSpec&) const = default;
};

/// Row-major scalar field on a square grid.
class Grid2D {
public:
    Grid2D() = default;
    explicit Grid2D(int resolution, double fill = 0.0)
        : resolution_(resolution),
          data_(static_cast<std::size_t>(resolution) * resolution, fill) {}

    int resolution() const { return resolution_; }
    std::size_t size() const { return data_.size(); }

    double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * resolution_ + j]; }
    double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * resolution_ + j]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Grid2D&) const = default;

private:
    int resolution_ = 0;
    std::vector<double> data_;
};

}  // namespace liouville
