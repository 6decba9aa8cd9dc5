#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "nelsonlab/grid.hpp"

namespace nelsonlab {

using cplx = std::complex<double>;

/// Scalar samples on every node of a Grid. Value semantics; operators are
/// free functions that return fresh fields.
template <class T>
class FieldT {
public:
    FieldT() = default;
    explicit FieldT(Grid grid, T fill = T{})
        : grid_(std::move(grid)), values_(grid_.size(), fill) {}
    FieldT(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw config_error("field sample count does not match grid size");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    T& at(const std::array<int, Grid::max_dims>& idx) { return values_[grid_.index(idx)]; }
    const T& at(const std::array<int, Grid::max_dims>& idx) const { return values_[grid_.index(idx)]; }

    std::vector<T>& values() { return values_; }
    const std::vector<T>& values() const { return values_; }

    /// Fill from a callable of the node coordinates.
    template <class F>
    void assign(F&& f) {
        std::array<double, Grid::max_dims> x{};
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const auto idx = grid_.unflatten(i);
            for (int a = 0; a < grid_.dims(); ++a) x[a] = grid_.coord(a, idx[a]);
            values_[i] = f(x);
        }
    }

    bool all_finite() const {
        for (const auto& v : values_)
            if (!is_finite(v)) return false;
        return true;
    }

private:
    static bool is_finite(double v) { return std::isfinite(v); }
    static bool is_finite(const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

    Grid grid_;
    std::vector<T> values_;
};

using RealField = FieldT<double>;
using ComplexField = FieldT<cplx>;

/// One scalar field per grid axis (a configuration-space vector field).
struct VectorField {
    Grid grid;
    std::vector<RealField> comp; // comp[a] holds the axis-a component

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), comp(g.dims(), RealField(g)) {}

    int dims() const { return grid.dims(); }
    RealField& operator[](int a) { return comp[a]; }
    const RealField& operator[](int a) const { return comp[a]; }
};

/// Riemann sum times the cell volume (exact node weights on the periodic
/// torus, half-open convention otherwise).
template <class T>
T integrate(const FieldT<T>& f) {
    // compensated: desk-scale grids reach 2^24 nodes and tests pin 1e-10
    T sum{}, carry{};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const T y = f[i] - carry;
        const T t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum * f.grid().cell_volume();
}

inline double norm_squared(const ComplexField& psi) {
    double sum = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double y = std::norm(psi[i]) - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum * psi.grid().cell_volume();
}

inline void normalize(ComplexField& psi) {
    const double n2 = norm_squared(psi);
    if (!(n2 > 0.0)) throw numerical_error("cannot normalize a null wavefunction");
    const double s = 1.0 / std::sqrt(n2);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= s;
}

inline RealField density(const ComplexField& psi) {
    RealField rho(psi.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
    return rho;
}

namespace detail {

struct InterpStencil {
    // per axis: lower node, weight of the upper node
    std::array<int, Grid::max_dims> lo{};
    std::array<double, Grid::max_dims> frac{};
};

inline InterpStencil locate(const Grid& g, const std::array<double, Grid::max_dims>& p) {
    InterpStencil s;
    for (int a = 0; a < g.dims(); ++a) {
        const auto& ax = g.axis(a);
        double x = p[a];
        if (ax.periodic) {
            x = g.wrap_coord(a, x);
        } else if (x < ax.min || x > ax.max) {
            throw out_of_domain_error("interpolation point outside non-periodic axis");
        }
        const double u = (x - ax.min) / ax.spacing();
        int lo = static_cast<int>(std::floor(u));
        double frac = u - lo;
        if (!ax.periodic && lo >= ax.points - 1) {
            // clamp onto the final cell; x may sit in [last node, max]
            lo = ax.points - 2;
            frac = u - lo;
        }
        s.lo[a] = lo;
        s.frac[a] = frac;
    }
    return s;
}

} // namespace detail

/// Multilinear interpolation of the surrounding 2^dims nodes.
template <class T>
T interpolate(const FieldT<T>& f, const std::array<double, Grid::max_dims>& p) {
    const Grid& g = f.grid();
    const auto s = detail::locate(g, p);
    const int d = g.dims();
    T acc{};
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, Grid::max_dims> idx{};
        for (int a = 0; a < d; ++a) {
            const int up = (c >> a) & 1;
            w *= up ? s.frac[a] : (1.0 - s.frac[a]);
            idx[a] = g.wrap_index(a, s.lo[a] + up);
        }
        acc += f[g.index(idx)] * w;
    }
    return acc;
}

inline std::array<double, Grid::max_dims> interpolate(const VectorField& v,
                                                      const std::array<double, Grid::max_dims>& p) {
    std::array<double, Grid::max_dims> out{};
    for (int a = 0; a < v.dims(); ++a) out[a] = interpolate(v.comp[a], p);
    return out;
}

} // namespace nelsonlab
