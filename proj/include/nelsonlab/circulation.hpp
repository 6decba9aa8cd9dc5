#pragma once

#include <queue>

#include "nelsonlab/madelung.hpp"

namespace nelsonlab {

/// Closed polyline in configuration space. The segment from the last vertex
/// back to the first is implied. `active_axis` masks which coordinate block
/// the loop displaces; inactive coordinates are held fixed and contribute no
/// line-integral legs.
struct LoopPath {
    std::vector<std::array<double, Grid::max_dims>> vertices;
    std::array<bool, Grid::max_dims> active_axis{true, true, true};

    std::size_t segments() const { return vertices.size(); }
};

/// Circle of `n` vertices in the (axis_a, axis_b) plane; all other
/// coordinates pinned at `center`. 256 vertices keep per-segment phase
/// increments well under pi for winding numbers up to ~8.
inline LoopPath circle_loop(const std::array<double, Grid::max_dims>& center, double radius,
                            int axis_a = 0, int axis_b = 1, int n = 256) {
    if (n < 8) throw config_error("circle loop needs at least 8 vertices");
    LoopPath loop;
    loop.vertices.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double phi = 2.0 * M_PI * k / n;
        auto p = center;
        p[axis_a] += radius * std::cos(phi);
        p[axis_b] += radius * std::sin(phi);
        loop.vertices.push_back(p);
    }
    loop.active_axis = {false, false, false};
    loop.active_axis[axis_a] = true;
    loop.active_axis[axis_b] = true;
    return loop;
}

inline LoopPath reversed(const LoopPath& loop) {
    LoopPath out = loop;
    std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

namespace detail {

inline void check_loop_resolution(const Grid& g, const LoopPath& loop) {
    if (loop.vertices.size() < 3) throw config_error("loop needs at least 3 vertices");
    for (std::size_t k = 0; k < loop.vertices.size(); ++k) {
        const auto& a = loop.vertices[k];
        const auto& b = loop.vertices[(k + 1) % loop.vertices.size()];
        for (int ax = 0; ax < g.dims(); ++ax) {
            if (!loop.active_axis[ax]) continue;
            double d = std::abs(b[ax] - a[ax]);
            if (g.periodic(ax)) d = std::min(d, g.axis(ax).length() - d);
            if (d >= 2.0 * g.spacing(ax))
                throw resolution_error("loop segment spans >= 2 grid cells; add vertices");
        }
    }
}

} // namespace detail

struct CirculationResult {
    double value = 0.0;        // action units
    bool crossed_floored = false;
};

/// Trapezoid line integral sum_segments p(midpoint) . dq over the active
/// axes. Pass `floored` (from MadelungFields) to get the near-node warning
/// flag; the value is returned either way.
inline CirculationResult circulate(const VectorField& momentum, const LoopPath& loop,
                                   const std::vector<std::uint8_t>* floored = nullptr) {
    const Grid& g = momentum.grid;
    detail::check_loop_resolution(g, loop);
    CirculationResult res;
    double sum = 0.0, carry = 0.0;
    const std::size_t n = loop.vertices.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& a = loop.vertices[k];
        const auto& b = loop.vertices[(k + 1) % n];
        std::array<double, Grid::max_dims> mid{};
        for (int ax = 0; ax < g.dims(); ++ax) mid[ax] = 0.5 * (a[ax] + b[ax]);
        if (floored) {
            const auto st = detail::locate(g, mid);
            std::array<int, Grid::max_dims> idx{};
            for (int ax = 0; ax < g.dims(); ++ax)
                idx[ax] = g.wrap_index(ax, st.lo[ax] + (st.frac[ax] > 0.5 ? 1 : 0));
            if ((*floored)[g.index(idx)]) res.crossed_floored = true;
        }
        double leg = 0.0;
        for (int ax = 0; ax < g.dims(); ++ax) {
            if (!loop.active_axis[ax]) continue;
            leg += interpolate(momentum[ax], mid) * (b[ax] - a[ax]);
        }
        const double y = leg - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    res.value = sum;
    return res;
}

/// Winding number of psi around a loop: accumulated principal-branch phase
/// increments of the interpolated wavefunction, divided by 2 pi. Guaranteed
/// an integer when every increment stays below pi/2; larger increments mean
/// the loop is too coarse (or touches a node) and raise resolution_error.
inline int winding_number(const ComplexField& psi, const LoopPath& loop) {
    const Grid& g = psi.grid();
    detail::check_loop_resolution(g, loop);
    const std::size_t n = loop.vertices.size();
    std::vector<cplx> samples(n);
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        samples[k] = interpolate(psi, loop.vertices[k]);
        scale = std::max(scale, std::abs(samples[k]));
    }
    if (scale == 0.0) throw resolution_error("winding loop lies entirely on a node");
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const cplx z0 = samples[k];
        const cplx z1 = samples[(k + 1) % n];
        if (std::abs(z0) < 1e-12 * scale || std::abs(z1) < 1e-12 * scale)
            throw resolution_error("winding loop sample too close to a node");
        const double inc = std::arg(z1 / z0);
        if (std::abs(inc) >= 0.5 * M_PI)
            throw resolution_error("phase increment >= pi/2 along a loop segment; refine loop");
        total += inc;
    }
    const double n_raw = total / (2.0 * M_PI);
    const long rounded = std::lround(n_raw);
    if (std::abs(n_raw - static_cast<double>(rounded)) > 0.25)
        throw resolution_error("winding sum is not near an integer; refine loop");
    return static_cast<int>(rounded);
}

struct NodeCluster {
    std::array<double, Grid::max_dims> centroid{};
    std::size_t cells = 0;
};

/// Connected components (axis-adjacency, periodic-aware) of the cells with
/// rho below eps_rel * max(rho). Wavepacket tails dip under the threshold
/// too, so a cluster only counts as a node when every cell bordering it sits
/// at least `sharpness` times above the threshold: genuine zeros are enclosed
/// by O(h^2) density, tail clusters fade out gradually and get dropped.
inline std::vector<NodeCluster> node_detect(const RealField& rho, double eps_rel = 1e-8,
                                            double sharpness = 100.0) {
    const Grid& g = rho.grid();
    double rho_max = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) rho_max = std::max(rho_max, rho[i]);
    const double eps = eps_rel * rho_max;

    std::vector<std::uint8_t> low(g.size(), 0), seen(g.size(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) low[i] = rho[i] < eps;

    std::vector<NodeCluster> clusters;
    for (std::size_t start = 0; start < g.size(); ++start) {
        if (!low[start] || seen[start]) continue;
        NodeCluster cl;
        const auto anchor_idx = g.unflatten(start);
        std::array<double, Grid::max_dims> anchor{};
        for (int a = 0; a < g.dims(); ++a) anchor[a] = g.coord(a, anchor_idx[a]);
        std::array<double, Grid::max_dims> disp_sum{};
        bool sharp = true;
        std::queue<std::size_t> work;
        work.push(start);
        seen[start] = 1;
        while (!work.empty()) {
            const std::size_t i = work.front();
            work.pop();
            ++cl.cells;
            const auto idx = g.unflatten(i);
            for (int a = 0; a < g.dims(); ++a) {
                // displacement from the anchor, wrapped on periodic axes
                double d = g.coord(a, idx[a]) - anchor[a];
                if (g.periodic(a)) {
                    const double L = g.axis(a).length();
                    d -= L * std::round(d / L);
                }
                disp_sum[a] += d;
            }
            for (int a = 0; a < g.dims(); ++a) {
                for (int step : {-1, 1}) {
                    auto nb = idx;
                    const int j = idx[a] + step;
                    if (g.periodic(a)) {
                        nb[a] = (j + g.points(a)) % g.points(a);
                    } else if (j < 0 || j >= g.points(a)) {
                        sharp = false; // runs off the domain edge
                        continue;
                    } else {
                        nb[a] = j;
                    }
                    const std::size_t ni = g.index(nb);
                    if (low[ni]) {
                        if (!seen[ni]) {
                            seen[ni] = 1;
                            work.push(ni);
                        }
                    } else if (rho[ni] < sharpness * eps) {
                        sharp = false;
                    }
                }
            }
        }
        for (int a = 0; a < g.dims(); ++a)
            cl.centroid[a] = g.wrap_coord(a, anchor[a] + disp_sum[a] / static_cast<double>(cl.cells));
        if (sharp) clusters.push_back(cl);
    }
    return clusters;
}

} // namespace nelsonlab
