#pragma once

#include "nelsonlab/circulation.hpp"
#include "nelsonlab/madelung.hpp"
#include "nelsonlab/propagator.hpp"

namespace nelsonlab {

/// Hydrodynamic state (rho, v) integrated directly -- no phase function is
/// ever formed, so velocity fields with non-quantized circulation are
/// first-class citizens here.
struct HydroState {
    Grid grid;
    RealField rho;
    VectorField v;
    double t = 0.0;

    HydroState() = default;
    HydroState(const Grid& g) : grid(g), rho(g, 0.0), v(g) {}
};

struct HydroParams {
    double dt = 5e-4;
    bool quantum_kinetic = true;
    Scheme scheme = Scheme::central;
    double velocity_cap = 0.0;     // 0 = uncapped
    double mask_floor_rel = 1e-8;  // mass-weight scale: dv is tapered by rho/(rho+eps)
    double cfl_limit = 0.5;
};

namespace detail {

struct HydroRhs {
    RealField drho;
    VectorField dv;
};

inline HydroRhs hydro_rhs(const HydroState& s, const Hamiltonian& H, const HydroParams& par) {
    const Grid& g = s.grid;
    HydroRhs rhs{RealField(g, 0.0), VectorField(g)};

    // d_t rho = - sum_a d_a (v_a rho)
    for (int a = 0; a < g.dims(); ++a) {
        RealField flux(g);
        for (std::size_t i = 0; i < g.size(); ++i) flux[i] = s.v[a][i] * s.rho[i];
        const RealField div = derivative(flux, a, par.scheme);
        for (std::size_t i = 0; i < g.size(); ++i) rhs.drho[i] -= div[i];
    }

    // total potential: V plus the quantum kinetic recomputed from rho
    RealField pot = H.potential;
    if (par.quantum_kinetic) {
        for (int p = 0; p < H.layout.n_particles; ++p) {
            const RealField qk = quantum_kinetic(s.rho, H, p, par.scheme);
            for (std::size_t i = 0; i < g.size(); ++i) pot[i] += qk[i];
        }
    }

    // d_t v_a = - sum_b v_b d_b v_a - (1/m_a) d_a pot, tapered by the local
    // mass weight rho/(rho + eps): the velocity equation carries no physics
    // where the density has left, and untapered empty cells accelerate under
    // the bare force until they wreck the CFL bound.
    double rho_max = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) rho_max = std::max(rho_max, s.rho[i]);
    const double eps_w = par.mask_floor_rel * rho_max;
    for (int a = 0; a < g.dims(); ++a) {
        RealField acc(g, 0.0);
        const RealField dpot = derivative(pot, a, par.scheme);
        const double inv_m = 1.0 / H.mass_of_axis(a);
        for (std::size_t i = 0; i < g.size(); ++i) acc[i] = -inv_m * dpot[i];
        for (int b = 0; b < g.dims(); ++b) {
            const RealField dv = derivative(s.v[a], b, par.scheme);
            for (std::size_t i = 0; i < g.size(); ++i) acc[i] -= s.v[b][i] * dv[i];
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = s.rho[i] / (s.rho[i] + eps_w);
            acc[i] *= w;
        }
        rhs.dv[a] = std::move(acc);
    }
    return rhs;
}

inline void hydro_postprocess(HydroState& s, const HydroParams& par) {
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        if (s.rho[i] < 0.0) s.rho[i] = 0.0;
        if (par.velocity_cap > 0.0) {
            double mag2 = 0.0;
            for (int a = 0; a < s.grid.dims(); ++a) mag2 += s.v[a][i] * s.v[a][i];
            if (mag2 > par.velocity_cap * par.velocity_cap) {
                const double scale = par.velocity_cap / std::sqrt(mag2);
                for (int a = 0; a < s.grid.dims(); ++a) s.v[a][i] *= scale;
            }
        }
    }
}

} // namespace detail

/// One explicit midpoint (RK2) step of the coupled (rho, v) system. The
/// osmotic/quantum terms are recomputed from rho at every stage. Violating
/// the advective CFL bound rejects the step and names a workable dt.
inline void integrate_hydrodynamic(HydroState& s, const Hamiltonian& H, const HydroParams& par) {
    const Grid& g = s.grid;
    double vmax = 0.0, hmin = g.spacing(0);
    for (int a = 0; a < g.dims(); ++a) {
        hmin = std::min(hmin, g.spacing(a));
        for (std::size_t i = 0; i < g.size(); ++i) vmax = std::max(vmax, std::abs(s.v[a][i]));
    }
    if (vmax * par.dt / hmin >= par.cfl_limit)
        throw numerical_error("hydrodynamic CFL violated: max|v| dt / h = " +
                              std::to_string(vmax * par.dt / hmin) + "; try dt <= " +
                              std::to_string(0.8 * par.cfl_limit * hmin / vmax));

    const auto k1 = detail::hydro_rhs(s, H, par);
    HydroState mid = s;
    for (std::size_t i = 0; i < g.size(); ++i) mid.rho[i] += 0.5 * par.dt * k1.drho[i];
    for (int a = 0; a < g.dims(); ++a)
        for (std::size_t i = 0; i < g.size(); ++i) mid.v[a][i] += 0.5 * par.dt * k1.dv[a][i];
    detail::hydro_postprocess(mid, par);

    const auto k2 = detail::hydro_rhs(mid, H, par);
    for (std::size_t i = 0; i < g.size(); ++i) s.rho[i] += par.dt * k2.drho[i];
    for (int a = 0; a < g.dims(); ++a)
        for (std::size_t i = 0; i < g.size(); ++i) s.v[a][i] += par.dt * k2.dv[a][i];
    detail::hydro_postprocess(s, par);
    s.t += par.dt;
}

/// Annular vortex state on a 2-D grid: rho ~ r^{2 alpha} exp(-m w r^2 / hbar)
/// (the stationary profile for any real alpha, integer or not) and azimuthal
/// velocity alpha*hbar/(m r), mollified to solid-body rotation inside the
/// core radius. Canonical circulation on any loop outside the core is
/// alpha * h by construction.
inline HydroState vortex_initializer(const Grid& g, const Hamiltonian& H, double alpha,
                                     double core_radius, double omega = 1.0,
                                     const std::array<double, 2>& center = {0.0, 0.0}) {
    if (g.dims() != 2) throw config_error("vortex_initializer needs a 2-D grid");
    const double h = std::max(g.spacing(0), g.spacing(1));
    if (core_radius < 2.0 * h)
        throw resolution_error("vortex core radius below 2 grid cells");
    const double m = H.mass[0];
    const double scale = m * omega / H.hbar;

    HydroState s(g);
    s.rho.assign([&](const auto& x) {
        const double dx = x[0] - center[0];
        const double dy = x[1] - center[1];
        const double r2 = dx * dx + dy * dy;
        return std::pow(std::max(r2, 1e-300), std::abs(alpha)) * std::exp(-scale * r2);
    });
    double mass_total = integrate(s.rho);
    for (std::size_t i = 0; i < g.size(); ++i) s.rho[i] /= mass_total;

    const double coef = alpha * H.hbar / m;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto idx = g.unflatten(i);
        const double dx = g.coord(0, idx[0]) - center[0];
        const double dy = g.coord(1, idx[1]) - center[1];
        const double r = std::hypot(dx, dy);
        double vphi_over_r; // v_phi / r
        if (r >= core_radius) {
            vphi_over_r = coef / (r * r);
        } else {
            vphi_over_r = coef / (core_radius * core_radius); // solid body inside
        }
        s.v[0][i] = -vphi_over_r * dy;
        s.v[1][i] = vphi_over_r * dx;
    }
    return s;
}

struct CirculationSample {
    double t = 0.0;
    double value = 0.0; // action units
    bool flagged = false;
};

struct DriftReport {
    std::vector<CirculationSample> series;
    double initial = 0.0;
    double max_abs_drift = 0.0; // over unflagged samples
    double max_rel_drift = 0.0; // relative to |initial| (0 when initial == 0)
};

/// Steps the flow for `steps` steps, measuring the canonical circulation
/// m v (plus any uniform (e/c)A, which integrates to zero on closed loops)
/// around a fixed loop every `stride` steps. Samples whose loop touches
/// near-empty cells are flagged and excluded from the drift statistic.
inline DriftReport circulation_drift_experiment(HydroState& s, const Hamiltonian& H,
                                                const HydroParams& par, const LoopPath& loop,
                                                int steps, int stride) {
    const Grid& g = s.grid;
    DriftReport rep;
    auto measure = [&]() {
        VectorField momentum(g);
        std::vector<std::uint8_t> empty_mask(g.size(), 0);
        double rho_max = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rho_max = std::max(rho_max, s.rho[i]);
        for (std::size_t i = 0; i < g.size(); ++i)
            empty_mask[i] = s.rho[i] <= par.mask_floor_rel * rho_max;
        for (int a = 0; a < g.dims(); ++a)
            for (std::size_t i = 0; i < g.size(); ++i)
                momentum[a][i] = H.mass_of_axis(a) * s.v[a][i];
        const auto res = circulate(momentum, loop, &empty_mask);
        rep.series.push_back({s.t, res.value, res.crossed_floored});
    };
    measure();
    rep.initial = rep.series.front().value;
    for (int k = 1; k <= steps; ++k) {
        integrate_hydrodynamic(s, H, par);
        if (k % stride == 0 || k == steps) measure();
    }
    for (const auto& sample : rep.series) {
        if (sample.flagged) continue;
        const double d = std::abs(sample.value - rep.initial);
        rep.max_abs_drift = std::max(rep.max_abs_drift, d);
    }
    if (rep.initial != 0.0) rep.max_rel_drift = rep.max_abs_drift / std::abs(rep.initial);
    return rep;
}

/// Classical energy functional Int rho (sum_a m_a v_a^2 / 2 + V) dq.
inline double classical_energy(const HydroState& s, const Hamiltonian& H) {
    RealField e(s.grid);
    for (std::size_t i = 0; i < e.size(); ++i) {
        double kin = 0.0;
        for (int a = 0; a < s.grid.dims(); ++a)
            kin += 0.5 * H.mass_of_axis(a) * s.v[a][i] * s.v[a][i];
        e[i] = s.rho[i] * (kin + H.potential[i]);
    }
    return integrate(e);
}

struct HydroComparison {
    std::vector<double> times;
    std::vector<double> l2_rho, max_rho; // density error norms
    std::vector<double> l2_v, max_v;     // velocity error norms on the bulk
};

/// Runs the hydrodynamic flow and the wavefunction propagator side by side
/// from the same initial data and reports density/velocity error norms.
/// Velocity errors are measured where rho exceeds 1e-6 of its peak.
inline HydroComparison compare_to_schrodinger(const ComplexField& psi0, const Hamiltonian& H,
                                              const HydroParams& par, int steps, int stride,
                                              EvolutionMode mode = EvolutionMode::quantum) {
    HydroComparison rep;
    ComplexField psi = psi0;
    MadelungFields f0 = decompose(psi0, H, 0.0);
    HydroState s(psi0.grid());
    s.rho = f0.rho;
    s.v = f0.v;

    auto record = [&](double t) {
        MadelungFields f = decompose(psi, H, t);
        double rho_max = 0.0;
        for (std::size_t i = 0; i < f.rho.size(); ++i) rho_max = std::max(rho_max, f.rho[i]);
        double l2r = 0.0, mxr = 0.0, l2v = 0.0, mxv = 0.0;
        std::size_t bulk = 0;
        for (std::size_t i = 0; i < f.rho.size(); ++i) {
            const double dr = s.rho[i] - f.rho[i];
            l2r += dr * dr;
            mxr = std::max(mxr, std::abs(dr));
            if (f.rho[i] > 1e-6 * rho_max) {
                ++bulk;
                for (int a = 0; a < s.grid.dims(); ++a) {
                    const double dv = s.v[a][i] - f.v[a][i];
                    l2v += dv * dv;
                    mxv = std::max(mxv, std::abs(dv));
                }
            }
        }
        rep.times.push_back(t);
        rep.l2_rho.push_back(std::sqrt(l2r / static_cast<double>(f.rho.size())));
        rep.max_rho.push_back(mxr);
        rep.l2_v.push_back(bulk ? std::sqrt(l2v / static_cast<double>(bulk)) : 0.0);
        rep.max_v.push_back(mxv);
    };

    record(0.0);
    for (int k = 1; k <= steps; ++k) {
        const double t_prev = (k - 1) * par.dt;
        split_step(psi, H, t_prev, par.dt, mode);
        integrate_hydrodynamic(s, H, par);
        if (k % stride == 0 || k == steps) record(k * par.dt);
    }
    return rep;
}

} // namespace nelsonlab
