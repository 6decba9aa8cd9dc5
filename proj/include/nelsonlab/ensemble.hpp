#pragma once

#include <thread>

#include "nelsonlab/hamiltonian.hpp"
#include "nelsonlab/io.hpp"
#include "nelsonlab/rng.hpp"
#include "nelsonlab/stats.hpp"

namespace nelsonlab {

/// Per-axis diffusion coefficients nu = hbar/2m; Wiener increments have
/// per-axis variance 2 nu dt.
struct NoiseSpec {
    std::array<double, Grid::max_dims> nu{};

    static NoiseSpec from(const Hamiltonian& H) {
        NoiseSpec n;
        for (int a = 0; a < H.grid.dims(); ++a) n.nu[a] = H.nu_of_axis(a);
        return n;
    }
};

/// M walkers in configuration space with an addressable RNG state. The
/// (seed, walker, step) triple fully determines every random draw, so runs
/// reproduce bit-identically for any thread partitioning.
struct Ensemble {
    Grid grid;
    std::size_t walkers = 0;
    std::vector<double> pos; // walker-major, dims entries each
    double time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step_count = 0;
    long reflections = 0;
    long clamped = 0;

    int dims() const { return grid.dims(); }
    double* walker(std::size_t w) { return pos.data() + w * static_cast<std::size_t>(dims()); }
    const double* walker(std::size_t w) const {
        return pos.data() + w * static_cast<std::size_t>(dims());
    }
};

namespace detail {

constexpr std::uint64_t kPurposeSample = 1;
constexpr std::uint64_t kPurposeStep = 2;

} // namespace detail

/// M i.i.d. samples from a grid density: per-axis inverse-CDF on the marginal
/// of axis 0, then conditional sampling of the remaining axes, with uniform
/// jitter inside the selected cell. Cells are centered on their nodes
/// (node +- h/2), which keeps the sampled law unbiased to O(h^2); the sampled
/// law is the piecewise-constant cell density that histogram tests integrate.
inline Ensemble sample_initial(const RealField& rho0, std::size_t walkers, std::uint64_t seed,
                               double t0 = 0.0) {
    const Grid& g = rho0.grid();
    const int d = g.dims();
    Ensemble ens;
    ens.grid = g;
    ens.walkers = walkers;
    ens.seed = seed;
    ens.time = t0;
    ens.pos.resize(walkers * static_cast<std::size_t>(d));

    CounterRng rng(seed, detail::kPurposeSample);

    // cumulative marginal over axis 0
    const int n0 = g.points(0);
    std::vector<double> cdf0(n0, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) cdf0[g.unflatten(i)[0]] += std::max(rho0[i], 0.0);
    for (int i = 1; i < n0; ++i) cdf0[i] += cdf0[i - 1];
    const double total = cdf0[n0 - 1];
    if (!(total > 0.0)) throw config_error("cannot sample from a null density");

    auto pick = [](const std::vector<double>& cdf, double u) {
        const double target = u * cdf.back();
        return static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
    };

    for (std::size_t w = 0; w < walkers; ++w) {
        std::array<int, Grid::max_dims> cell{};
        std::uint32_t draw = 0;
        cell[0] = pick(cdf0, rng.uniform(w, 0, draw++));
        if (d >= 2) {
            const int n1 = g.points(1);
            std::vector<double> cdf1(n1, 0.0);
            if (d == 2) {
                for (int j = 0; j < n1; ++j) cdf1[j] = std::max(rho0.at({cell[0], j, 0}), 0.0);
            } else {
                for (int j = 0; j < n1; ++j)
                    for (int k = 0; k < g.points(2); ++k)
                        cdf1[j] += std::max(rho0.at({cell[0], j, k}), 0.0);
            }
            for (int j = 1; j < n1; ++j) cdf1[j] += cdf1[j - 1];
            cell[1] = pick(cdf1, rng.uniform(w, 0, draw++));
        }
        if (d == 3) {
            const int n2 = g.points(2);
            std::vector<double> cdf2(n2, 0.0);
            for (int k = 0; k < n2; ++k) cdf2[k] = std::max(rho0.at({cell[0], cell[1], k}), 0.0);
            for (int k = 1; k < n2; ++k) cdf2[k] += cdf2[k - 1];
            cell[2] = pick(cdf2, rng.uniform(w, 0, draw++));
        }
        for (int a = 0; a < d; ++a) {
            const double jitter = rng.uniform(w, 1, static_cast<std::uint32_t>(a));
            double x = g.axis(a).min + (cell[a] + jitter - 0.5) * g.spacing(a);
            if (g.periodic(a)) x = g.wrap_coord(a, x);
            ens.walker(w)[a] = x;
        }
    }
    return ens;
}

namespace detail {

template <class DriftFn>
void advance_walkers(Ensemble& ens, DriftFn&& drift_at, double dt, const NoiseSpec& noise,
                     double drift_clamp, double time_sign, int threads) {
    const int d = ens.dims();
    const Grid& g = ens.grid;
    CounterRng rng(ens.seed, kPurposeStep);
    const std::uint64_t step = ens.step_count;

    std::array<double, Grid::max_dims> sigma{};
    for (int a = 0; a < d; ++a) sigma[a] = std::sqrt(2.0 * noise.nu[a] * std::abs(dt));

    const std::size_t n_threads = std::max(1, threads);
    std::vector<long> reflections(n_threads, 0), clamps(n_threads, 0);

    auto work = [&](std::size_t tid, std::size_t lo, std::size_t hi) {
        for (std::size_t w = lo; w < hi; ++w) {
            double* q = ens.walker(w);
            std::array<double, Grid::max_dims> x{};
            for (int a = 0; a < d; ++a) x[a] = q[a];
            auto b = drift_at(x);
            double mag2 = 0.0;
            for (int a = 0; a < d; ++a) mag2 += b[a] * b[a];
            if (mag2 > drift_clamp * drift_clamp) {
                const double s = drift_clamp / std::sqrt(mag2);
                for (int a = 0; a < d; ++a) b[a] *= s;
                ++clamps[tid];
            }
            for (int a = 0; a < d; ++a) {
                const double xi = rng.normal(w, step, static_cast<std::uint32_t>(a));
                double y = q[a] + time_sign * b[a] * dt + sigma[a] * xi;
                const auto& ax = g.axis(a);
                if (ax.periodic) {
                    const double L = ax.length();
                    y -= L * std::floor((y - ax.min) / L);
                } else {
                    int guard = 0;
                    while ((y < ax.min || y > ax.max) && guard++ < 64) {
                        y = (y < ax.min) ? 2.0 * ax.min - y : 2.0 * ax.max - y;
                        ++reflections[tid];
                    }
                }
                q[a] = y;
            }
        }
    };

    if (n_threads == 1) {
        work(0, 0, ens.walkers);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (ens.walkers + n_threads - 1) / n_threads;
        for (std::size_t t = 0; t < n_threads; ++t) {
            const std::size_t lo = t * chunk;
            const std::size_t hi = std::min(ens.walkers, lo + chunk);
            if (lo < hi) pool.emplace_back(work, t, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    for (std::size_t t = 0; t < n_threads; ++t) {
        ens.reflections += reflections[t];
        ens.clamped += clamps[t];
    }
    ens.step_count += 1;
    ens.time += time_sign * dt;
}

} // namespace detail

/// Forward Euler-Maruyama step q <- q + b dt + sqrt(2 nu dt) xi. The drift
/// magnitude is clamped (osmotic velocities diverge at nodes); clamped steps
/// and boundary reflections are counted on the ensemble.
inline void euler_maruyama_step(Ensemble& ens, const VectorField& b, double dt,
                                const NoiseSpec& noise,
                                double drift_clamp = std::numeric_limits<double>::infinity(),
                                int threads = 1) {
    if (dt == 0.0) {
        ens.step_count += 1;
        return;
    }
    detail::advance_walkers(
        ens, [&](const std::array<double, Grid::max_dims>& x) { return interpolate(b, x); }, dt,
        noise, drift_clamp, +1.0, threads);
}

/// Time-reversed step q <- q - b* dt + sqrt(2 nu dt) xi, stepping t downward.
inline void backward_step(Ensemble& ens, const VectorField& b_star, double dt,
                          const NoiseSpec& noise,
                          double drift_clamp = std::numeric_limits<double>::infinity(),
                          int threads = 1) {
    if (dt == 0.0) {
        ens.step_count += 1;
        return;
    }
    detail::advance_walkers(
        ens, [&](const std::array<double, Grid::max_dims>& x) { return interpolate(b_star, x); },
        dt, noise, drift_clamp, -1.0, threads);
}

/// Histogram comparison against a grid density. Bins are groups of whole grid
/// cells (per-axis), so expected counts follow from exact cell sums; bins
/// with expectation below 5 are pooled by the chi-square machinery.
inline ChiSquareReport equilibrium_test(const Ensemble& ens, const RealField& rho_target,
                                        int bins_per_axis) {
    const Grid& g = rho_target.grid();
    if (!(bins_per_axis >= 2)) throw config_error("equilibrium test needs >= 2 bins per axis");
    const int d = g.dims();
    std::array<int, Grid::max_dims> nbins{1, 1, 1};
    std::size_t total_bins = 1;
    for (int a = 0; a < d; ++a) {
        nbins[a] = std::min(bins_per_axis, g.points(a));
        total_bins *= static_cast<std::size_t>(nbins[a]);
    }
    auto bin_of_cell = [&](int cell, int a) {
        return static_cast<int>((static_cast<long>(cell) * nbins[a]) / g.points(a));
    };
    auto flat_bin = [&](const std::array<int, Grid::max_dims>& b) {
        std::size_t f = 0;
        for (int a = 0; a < d; ++a) f = f * static_cast<std::size_t>(nbins[a]) + b[a];
        return f;
    };

    std::vector<double> expected(total_bins, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto idx = g.unflatten(i);
        std::array<int, Grid::max_dims> b{};
        for (int a = 0; a < d; ++a) b[a] = bin_of_cell(idx[a], a);
        expected[flat_bin(b)] += std::max(rho_target[i], 0.0);
    }

    std::vector<double> observed(total_bins, 0.0);
    for (std::size_t w = 0; w < ens.walkers; ++w) {
        std::array<int, Grid::max_dims> b{};
        bool inside = true;
        for (int a = 0; a < d; ++a) {
            const auto& ax = g.axis(a);
            double x = ens.walker(w)[a];
            if (ax.periodic) x = g.wrap_coord(a, x);
            // nearest node: cells are centered on their nodes
            int cell = static_cast<int>(std::floor((x - ax.min) / g.spacing(a) + 0.5));
            if (ax.periodic) {
                cell %= g.points(a);
            } else if (cell < 0 || cell >= g.points(a)) {
                inside = false;
                break;
            }
            b[a] = bin_of_cell(cell, a);
        }
        if (inside) observed[flat_bin(b)] += 1.0;
    }
    return chi_square_test(std::move(observed), std::move(expected));
}

enum class IncrementDirection { forward, backward };

struct DriftEstimate {
    Grid grid;                       // evaluation grid
    VectorField estimate;            // Nadaraya-Watson regression of dq/dt
    VectorField standard_error;      // per-axis standard error of the estimate
    std::vector<std::uint8_t> estimated; // 0 where too few local samples
};

/// Kernel regression of walker increments on position:
///   b_hat(x) = sum_w K(x - q_w) dq_w/dt / sum_w K
/// from two consecutive stored frames. Cells with an effective local sample
/// count below `min_effective` are marked unestimated.
inline DriftEstimate estimate_mean_derivative(const TrajectoryStore& store, std::size_t frame,
                                              IncrementDirection dir, const Grid& eval_grid,
                                              double kernel_width, double min_effective = 10.0) {
    if (store.frames.size() < 2) throw config_error("drift estimation needs >= 2 frames");
    std::size_t k0, k1;
    if (dir == IncrementDirection::forward) {
        if (frame + 1 >= store.frames.size())
            throw config_error("no forward increment at the last frame");
        k0 = frame;
        k1 = frame + 1;
    } else {
        if (frame == 0) throw config_error("no backward increment at the first frame");
        k0 = frame - 1;
        k1 = frame;
    }
    const double dt = store.frame_dt;
    const int d = store.dims;
    const auto& qa = store.frames[k0];
    const auto& qb = store.frames[k1];
    // increments are regressed on the position at the estimation time
    const auto& q_at = (dir == IncrementDirection::forward) ? qa : qb;

    DriftEstimate out{eval_grid, VectorField(eval_grid), VectorField(eval_grid),
                      std::vector<std::uint8_t>(eval_grid.size(), 0)};
    const double inv2w2 = 1.0 / (2.0 * kernel_width * kernel_width);

    for (std::size_t i = 0; i < eval_grid.size(); ++i) {
        const auto idx = eval_grid.unflatten(i);
        std::array<double, Grid::max_dims> x{};
        for (int a = 0; a < d; ++a) x[a] = eval_grid.coord(a, idx[a]);

        double wsum = 0.0, w2sum = 0.0;
        std::array<double, Grid::max_dims> mean{};
        for (std::size_t w = 0; w < store.walkers; ++w) {
            const double* p = q_at.data() + w * static_cast<std::size_t>(d);
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dx = p[a] - x[a];
                dist2 += dx * dx;
            }
            const double kern = std::exp(-dist2 * inv2w2);
            if (kern < 1e-12) continue;
            wsum += kern;
            w2sum += kern * kern;
            for (int a = 0; a < d; ++a) {
                const double rate =
                    (qb[w * static_cast<std::size_t>(d) + a] - qa[w * static_cast<std::size_t>(d) + a]) / dt;
                mean[a] += kern * rate;
            }
        }
        if (wsum <= 0.0) continue;
        const double n_eff = wsum * wsum / std::max(w2sum, 1e-300);
        if (n_eff < min_effective) continue;
        for (int a = 0; a < d; ++a) mean[a] /= wsum;

        // weighted residual variance -> standard error of the kernel mean
        std::array<double, Grid::max_dims> var{};
        for (std::size_t w = 0; w < store.walkers; ++w) {
            const double* p = q_at.data() + w * static_cast<std::size_t>(d);
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dx = p[a] - x[a];
                dist2 += dx * dx;
            }
            const double kern = std::exp(-dist2 * inv2w2);
            if (kern < 1e-12) continue;
            for (int a = 0; a < d; ++a) {
                const double rate =
                    (qb[w * static_cast<std::size_t>(d) + a] - qa[w * static_cast<std::size_t>(d) + a]) / dt;
                var[a] += kern * (rate - mean[a]) * (rate - mean[a]);
            }
        }
        out.estimated[i] = 1;
        for (int a = 0; a < d; ++a) {
            out.estimate[a][i] = mean[a];
            out.standard_error[a][i] = std::sqrt((var[a] / wsum) * (w2sum / (wsum * wsum)));
        }
    }
    return out;
}

struct TrajectoryResult {
    std::vector<std::array<double, Grid::max_dims>> points; // one per snapshot time
    bool truncated = false;
};

/// Deterministic mean-flow path: dq/dt = v(q,t) integrated with RK4 through a
/// series of velocity snapshots (multilinear in space, linear in time).
inline TrajectoryResult current_trajectory(const std::vector<VectorField>& v_series,
                                           const std::vector<double>& times,
                                           std::array<double, Grid::max_dims> q0,
                                           int substeps = 4) {
    if (v_series.size() != times.size() || v_series.size() < 2)
        throw config_error("current_trajectory needs >= 2 velocity snapshots");
    const Grid& g = v_series.front().grid;
    TrajectoryResult out;
    out.points.push_back(q0);
    auto v_at = [&](const std::array<double, Grid::max_dims>& x, double t, std::size_t k) {
        const double t0 = times[k], t1 = times[k + 1];
        const double w = (t - t0) / (t1 - t0);
        std::array<double, Grid::max_dims> res{};
        for (int a = 0; a < g.dims(); ++a)
            res[a] = (1.0 - w) * interpolate(v_series[k][a], x) +
                     w * interpolate(v_series[k + 1][a], x);
        return res;
    };
    std::array<double, Grid::max_dims> x = q0;
    for (std::size_t k = 0; k + 1 < v_series.size(); ++k) {
        const double dt_frame = times[k + 1] - times[k];
        const double h = dt_frame / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double t = times[k] + s * h;
            try {
                const auto k1 = v_at(x, t, k);
                std::array<double, Grid::max_dims> x2{}, x3{}, x4{};
                for (int a = 0; a < g.dims(); ++a) x2[a] = x[a] + 0.5 * h * k1[a];
                const auto k2 = v_at(x2, t + 0.5 * h, k);
                for (int a = 0; a < g.dims(); ++a) x3[a] = x[a] + 0.5 * h * k2[a];
                const auto k3 = v_at(x3, t + 0.5 * h, k);
                for (int a = 0; a < g.dims(); ++a) x4[a] = x[a] + h * k3[a];
                const auto k4 = v_at(x4, std::min(t + h, times[k + 1]), k);
                for (int a = 0; a < g.dims(); ++a)
                    x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            } catch (const out_of_domain_error&) {
                out.truncated = true;
                return out;
            }
        }
        out.points.push_back(x);
    }
    return out;
}

} // namespace nelsonlab
