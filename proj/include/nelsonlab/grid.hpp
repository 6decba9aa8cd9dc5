#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nelsonlab/errors.hpp"

namespace nelsonlab {

/// One axis of a tensor-product grid.
///
/// Nodes sit at min + j*h with h = (max-min)/points, j = 0..points-1. A
/// periodic axis identifies max with min, so the endpoint sample is not
/// duplicated; a non-periodic axis simply has no sample at max.
struct AxisSpec {
    int points = 0;
    double min = 0.0;
    double max = 0.0;
    bool periodic = true;

    double spacing() const { return (max - min) / points; }
    double length() const { return max - min; }
};

class Grid {
public:
    static constexpr int max_dims = 3;

    Grid() = default;

    explicit Grid(std::vector<AxisSpec> axes) : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > max_dims)
            throw config_error("grid must have 1 to 3 axes, got " + std::to_string(axes_.size()));
        size_ = 1;
        for (const auto& ax : axes_) {
            if (ax.points < 8)
                throw config_error("grid axis needs at least 8 points, got " + std::to_string(ax.points));
            if (!(ax.max > ax.min))
                throw config_error("grid axis extent must satisfy max > min");
            size_ *= static_cast<std::size_t>(ax.points);
        }
        // row-major, last axis fastest
        stride_.assign(axes_.size(), 1);
        for (int a = static_cast<int>(axes_.size()) - 2; a >= 0; --a)
            stride_[a] = stride_[a + 1] * static_cast<std::size_t>(axes_[a + 1].points);
    }

    int dims() const { return static_cast<int>(axes_.size()); }
    std::size_t size() const { return size_; }
    const AxisSpec& axis(int a) const { return axes_[a]; }
    const std::vector<AxisSpec>& axes() const { return axes_; }

    int points(int a) const { return axes_[a].points; }
    double spacing(int a) const { return axes_[a].spacing(); }
    bool periodic(int a) const { return axes_[a].periodic; }

    /// Coordinate of node j on axis a.
    double coord(int a, int j) const { return axes_[a].min + j * axes_[a].spacing(); }

    double cell_volume() const {
        double v = 1.0;
        for (const auto& ax : axes_) v *= ax.spacing();
        return v;
    }

    std::size_t stride(int a) const { return stride_[a]; }

    std::size_t index(const std::array<int, max_dims>& idx) const {
        std::size_t flat = 0;
        for (int a = 0; a < dims(); ++a) flat += stride_[a] * static_cast<std::size_t>(idx[a]);
        return flat;
    }

    std::array<int, max_dims> unflatten(std::size_t flat) const {
        std::array<int, max_dims> idx{0, 0, 0};
        for (int a = 0; a < dims(); ++a) {
            idx[a] = static_cast<int>(flat / stride_[a]);
            flat %= stride_[a];
        }
        return idx;
    }

    /// Wraps (periodic) or rejects (non-periodic) a node index.
    int wrap_index(int a, int j) const {
        const int n = axes_[a].points;
        if (axes_[a].periodic) {
            j %= n;
            if (j < 0) j += n;
            return j;
        }
        if (j < 0 || j >= n)
            throw out_of_domain_error("node index off non-periodic axis " + std::to_string(a));
        return j;
    }

    /// Maps a coordinate into the fundamental domain of a periodic axis.
    double wrap_coord(int a, double x) const {
        const auto& ax = axes_[a];
        if (!ax.periodic) return x;
        const double L = ax.length();
        double y = x - ax.min;
        y -= L * std::floor(y / L);
        return ax.min + y;
    }

    bool contains(const std::array<double, max_dims>& p) const {
        for (int a = 0; a < dims(); ++a) {
            if (axes_[a].periodic) continue;
            if (p[a] < axes_[a].min || p[a] > axes_[a].max - axes_[a].spacing()) return false;
        }
        return true;
    }

    bool same_layout(const Grid& other) const {
        if (dims() != other.dims()) return false;
        for (int a = 0; a < dims(); ++a) {
            const auto& x = axes_[a];
            const auto& y = other.axes_[a];
            if (x.points != y.points || x.min != y.min || x.max != y.max || x.periodic != y.periodic)
                return false;
        }
        return true;
    }

private:
    std::vector<AxisSpec> axes_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 0;
};

/// Convenience: a dims-dimensional cube [lo,hi)^d, periodic on every axis.
inline Grid make_cube_grid(int dims, int points, double lo, double hi, bool periodic = true) {
    std::vector<AxisSpec> axes(dims, AxisSpec{points, lo, hi, periodic});
    return Grid(std::move(axes));
}

} // namespace nelsonlab
